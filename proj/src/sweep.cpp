#include "rrcd/sweep.hpp"

#include <algorithm>
#include <future>
#include <ostream>

#include "rrcd/report_io.hpp"

namespace rrcd {

double SweepRow::slowdown() const {
  return conv.cycles == 0 ? 0.0 : static_cast<double>(rrcd.cycles) / static_cast<double>(conv.cycles) - 1.0;
}

double SweepRow::normalized_energy() const {
  const double base = energy_conv.total_pj();
  return base == 0.0 ? 0.0 : energy_rrcd.total_pj() / base;
}

double SweepRow::normalized_energy_suav() const {
  const double base = energy_conv.total_pj();
  return base == 0.0 ? 0.0 : energy_suav.total_pj() / base;
}

double SweepRow::mispeculation_rate() const {
  return rrcd.dest_writes == 0 ? 0.0
                               : static_cast<double>(rrcd.mispeculations) / static_cast<double>(rrcd.dest_writes);
}

std::uint64_t count_state_mismatches(const SimReport& reference, const SimReport& candidate) {
  std::uint64_t n = 0;
  for (const auto& [key, value] : reference.final_state) {
    const auto it = candidate.final_state.find(key);
    if (it == candidate.final_state.end() || it->second != value) ++n;
  }
  for (const auto& [key, value] : candidate.final_state) {
    if (!reference.final_state.count(key)) ++n;
  }
  return n;
}

namespace {

SweepRow run_point(const Trace& trace, const SweepConfig& config, ScenarioKind scenario, std::uint64_t seed) {
  SweepRow row;
  row.scenario = scenario;
  row.seed = seed;
  RunConfig rc = config.base;
  rc.scenario = scenario;
  rc.seed = seed;
  rc.mode = Mode::Conv;
  row.conv = run(trace, rc);
  rc.mode = Mode::Rrcd;
  row.rrcd = run(trace, rc);
  row.energy_conv = finalize(row.conv.ledger, config.constants, Mode::Conv, scenario);
  row.energy_suav = finalize(row.conv.ledger, config.constants, Mode::Suav, scenario);
  row.energy_rrcd = finalize(row.rrcd.ledger, config.constants, Mode::Rrcd, scenario);
  row.state_mismatches = count_state_mismatches(row.conv, row.rrcd);
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const Trace& trace, const SweepConfig& config) {
  config.base.validate();
  config.constants.validate();
  validate_trace(trace);
  std::vector<std::pair<ScenarioKind, std::uint64_t>> points;
  for (auto s : config.scenarios) {
    for (auto seed : config.seeds) points.emplace_back(s, seed);
  }
  std::vector<SweepRow> rows(points.size());
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, config.jobs));
  for (std::size_t first = 0; first < points.size(); first += jobs) {
    const std::size_t last = std::min(points.size(), first + jobs);
    std::vector<std::future<SweepRow>> batch;
    for (std::size_t i = first; i < last; ++i) {
      batch.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async, run_point, std::cref(trace),
                                 std::cref(config), points[i].first, points[i].second));
    }
    for (std::size_t i = first; i < last; ++i) rows[i] = batch[i - first].get();
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "scenario,seed,faulty_fraction,cycles_conv,cycles_rrcd,slowdown,energy_conv_pj,energy_suav_pj,"
        "energy_rrcd_pj,normalized_energy,normalized_energy_suav,static_rrcd_pj,regular_write_fraction,"
        "mispeculation_rate,reliable_compressed_occupancy,integrity_violations,state_mismatches,"
        "faulty_block_writes,invariant_violations,config_hash\n";
  const auto precision = os.precision(10);
  for (const auto& r : rows) {
    const double writes = r.rrcd.dest_writes == 0 ? 1.0 : static_cast<double>(r.rrcd.dest_writes);
    os << to_string(r.scenario) << ',' << r.seed << ',' << r.rrcd.faulty_fraction << ',' << r.conv.cycles << ','
       << r.rrcd.cycles << ',' << r.slowdown() << ',' << r.energy_conv.total_pj() << ','
       << r.energy_suav.total_pj() << ',' << r.energy_rrcd.total_pj() << ',' << r.normalized_energy() << ','
       << r.normalized_energy_suav() << ',' << r.energy_rrcd.static_pj << ','
       << static_cast<double>(r.rrcd.writes.regular) / writes << ',' << r.mispeculation_rate() << ','
       << r.rrcd.occupancy.fraction(OccupancyClass::ReliableCompressed) << ',' << r.rrcd.integrity_violations << ','
       << r.state_mismatches << ',' << r.rrcd.faulty_block_writes << ',' << r.rrcd.invariant_violations << ','
       << hex64(r.rrcd.config_hash) << '\n';
  }
  os.precision(precision);
}

}  // namespace rrcd
