#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "rrcd/pipeline.hpp"

namespace rrcd {

/// JSON form of a register value: {"pattern": ..., "params": {...}}.
/// Compressible values use their canonical pattern; others carry 512 hex digits.
nlohmann::json value_to_json(const RegisterEntry& value);
/// Throws ConfigError on unknown patterns or out-of-range parameters.
RegisterEntry value_from_json(const nlohmann::json& j);

/// One JSON object per line; blank lines are skipped. Errors carry path:line.
Trace read_trace(std::istream& is, std::string_view path = "<stream>");
Trace load_trace(const std::string& path);
void write_trace(std::ostream& os, const Trace& trace);
void save_trace(const std::string& path, const Trace& trace);

}  // namespace rrcd
