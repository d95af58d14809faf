#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rrcd/energy.hpp"
#include "rrcd/pipeline.hpp"

namespace rrcd {

struct SweepConfig {
  std::vector<ScenarioKind> scenarios{ScenarioKind::Comun, ScenarioKind::Agrupado, ScenarioKind::Disperso};
  std::vector<std::uint64_t> seeds{1};
  /// Mode, scenario and seed are overwritten per run.
  RunConfig base;
  EnergyConstants constants;
  int jobs = 1;
};

/// One (scenario, seed) point: a Conv run as the reference (its counters also
/// price Suav) and an RRCD run on the same trace.
struct SweepRow {
  ScenarioKind scenario = ScenarioKind::Comun;
  std::uint64_t seed = 0;
  SimReport conv;
  SimReport rrcd;
  EnergyReport energy_conv;
  EnergyReport energy_suav;
  EnergyReport energy_rrcd;
  /// Registers whose RRCD final value differs from Conv (or is missing).
  std::uint64_t state_mismatches = 0;

  double slowdown() const;
  double normalized_energy() const;
  double normalized_energy_suav() const;
  double mispeculation_rate() const;
};

/// Runs are independent; up to `jobs` execute concurrently. Rows come back in
/// scenario-major, seed-minor order regardless of scheduling.
std::vector<SweepRow> run_sweep(const Trace& trace, const SweepConfig& config);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

std::uint64_t count_state_mismatches(const SimReport& reference, const SimReport& candidate);

}  // namespace rrcd
