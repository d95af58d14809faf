#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "rrcd/energy.hpp"
#include "rrcd/pipeline.hpp"

namespace rrcd {

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);

nlohmann::json report_to_json(const SimReport& r);
/// Header line plus one row with the scalar fields of the report.
std::string report_csv(const SimReport& r);

nlohmann::json energy_to_json(const EnergyReport& e);
/// category,pj rows using the Static/Read/Write/Com/Des/Redirections/LDS names.
std::string energy_csv(const EnergyReport& e);

nlohmann::json area_to_json(const AreaReport& a);

/// One "wf reg hex" line per live register, sorted by (wf, reg).
void write_final_state(std::ostream& os, const SimReport& r);

}  // namespace rrcd
