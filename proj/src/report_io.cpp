#include "rrcd/report_io.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

namespace rrcd {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

json ledger_json(const EnergyLedger& l) {
  return {{"slice_block_read", l.slice_block_read},
          {"slice_block_write", l.slice_block_write},
          {"des_block", l.des_block},
          {"com_block", l.com_block},
          {"tr_read", l.tr_read},
          {"tr_write", l.tr_write},
          {"usr_alloc", l.usr_alloc},
          {"lds_spill_access", l.lds_spill_access},
          {"mispeculation_extra_writes", l.mispeculation_extra_writes},
          {"cycles", l.cycles}};
}

}  // namespace

json report_to_json(const SimReport& r) {
  const auto& o = r.occupancy;
  return {
      {"mode", std::string(to_string(r.mode))},
      {"scenario", std::string(to_string(r.scenario))},
      {"seed", r.seed},
      {"config_hash", hex64(r.config_hash)},
      {"pipeline_latency", r.pipeline_latency},
      {"cycles", r.cycles},
      {"instructions", r.instructions},
      {"dest_writes", r.dest_writes},
      {"first_writes", r.first_writes},
      {"writes",
       {{"regular", r.writes.regular},
        {"redirect_to_reliable", r.writes.redirect_to_reliable},
        {"redirect_to_faulty", r.writes.redirect_to_faulty},
        {"lds_spill", r.writes.lds_spill}}},
      {"steady_regular_fraction", r.steady_regular_fraction()},
      {"mispeculations", r.mispeculations},
      {"occupancy",
       {{"reliable_compressed", o.fraction(OccupancyClass::ReliableCompressed)},
        {"reliable_uncompressed", o.fraction(OccupancyClass::ReliableUncompressed)},
        {"faulty_compressed", o.fraction(OccupancyClass::FaultyCompressed)},
        {"faulty_uncompressed", o.fraction(OccupancyClass::FaultyUncompressed)},
        {"sampled_cycles", o.sampled_cycles}}},
      {"stalls",
       {{"raw_hazard", r.stalls.raw_hazard},
        {"idle", r.stalls.idle},
        {"mispeculation", r.stalls.mispeculation},
        {"lds", r.stalls.lds}}},
      {"read_port_cycles", r.read_port_cycles},
      {"write_port_cycles", r.write_port_cycles},
      {"ledger", ledger_json(r.ledger)},
      {"faulty_fraction", r.faulty_fraction},
      {"faulty_blocks", r.faulty_blocks},
      {"final_occupied_blocks", r.final_occupied_blocks},
      {"peak_spill_slots", r.peak_spill_slots},
      {"faulty_block_writes", r.faulty_block_writes},
      {"integrity_violations", r.integrity_violations},
      {"invariant_checks", r.invariant_checks},
      {"invariant_violations", r.invariant_violations},
      {"first_invariant_violation", r.first_invariant_violation},
  };
}

std::string report_csv(const SimReport& r) {
  const json j = report_to_json(r);
  std::vector<std::pair<std::string, std::string>> cols;
  auto flatten = [&](auto&& self, const json& node, const std::string& prefix) -> void {
    for (const auto& [k, v] : node.items()) {
      const std::string key = prefix.empty() ? k : prefix + "." + k;
      if (v.is_object()) {
        self(self, v, key);
      } else {
        cols.emplace_back(key, v.is_string() ? v.template get<std::string>() : v.dump());
      }
    }
  };
  flatten(flatten, j, "");
  std::ostringstream os;
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i].first;
  os << '\n';
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const std::string& v = cols[i].second;
    os << (i ? "," : "");
    if (v.find_first_of(",\"\n") != std::string::npos) {
      os << '"';
      for (char c : v) os << (c == '"' ? std::string("\"\"") : std::string(1, c));
      os << '"';
    } else {
      os << v;
    }
  }
  os << '\n';
  return os.str();
}

json energy_to_json(const EnergyReport& e) {
  return {{"Static", e.static_pj},
          {"Read", e.read_pj},
          {"Write", e.write_pj},
          {"Com/Des", e.comdes_pj},
          {"Redirections", e.redirections_pj},
          {"LDS", e.lds_pj},
          {"total_pj", e.total_pj()},
          {"leakage_pj", e.leakage_pj()},
          {"dynamic_pj", e.dynamic_pj()},
          {"comdes_static_pj", e.comdes_static_pj},
          {"redirections_static_pj", e.redirections_static_pj},
          {"warnings", e.warnings}};
}

std::string energy_csv(const EnergyReport& e) {
  std::ostringstream os;
  os.precision(17);
  os << "category,pj\n"
     << "Static," << e.static_pj << '\n'
     << "Read," << e.read_pj << '\n'
     << "Write," << e.write_pj << '\n'
     << "Com/Des," << e.comdes_pj << '\n'
     << "Redirections," << e.redirections_pj << '\n'
     << "LDS," << e.lds_pj << '\n'
     << "Total," << e.total_pj() << '\n';
  return os.str();
}

json area_to_json(const AreaReport& a) {
  return {{"slice_mm2", a.slice_mm2},
          {"com_mm2", a.com_mm2},
          {"des_mm2", a.des_mm2},
          {"tr_mm2", a.tr_mm2},
          {"usr_mm2", a.usr_mm2},
          {"unit_sum_mm2", a.unit_sum_mm2},
          {"total_mm2", a.total_mm2},
          {"unit_sum_overhead", a.unit_sum_overhead},
          {"overhead", a.overhead},
          {"overhead_percent", a.overhead_percent_rounded()}};
}

void write_final_state(std::ostream& os, const SimReport& r) {
  for (const auto& [key, value] : r.final_state) os << key.first << ' ' << key.second << ' ' << value.to_hex() << '\n';
}

}  // namespace rrcd
