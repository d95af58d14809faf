#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rrcd/faultmap.hpp"
#include "rrcd/mode.hpp"

namespace rrcd {

enum class EnergyEvent : std::uint8_t {
  SliceBlockRead,
  SliceBlockWrite,
  DesBlock,
  ComBlock,
  TrRead,
  TrWrite,
  UsrAlloc,
  LdsSpillAccess,  // one 64-byte beat
  MispeculationExtraWrite,
};

/// Event counters of one run. Mispeculation drain writes are counted both in
/// slice_block_write and in mispeculation_extra_writes.
struct EnergyLedger {
  std::uint64_t slice_block_read = 0;
  std::uint64_t slice_block_write = 0;
  std::uint64_t des_block = 0;
  std::uint64_t com_block = 0;
  std::uint64_t tr_read = 0;
  std::uint64_t tr_write = 0;
  std::uint64_t usr_alloc = 0;
  std::uint64_t lds_spill_access = 0;
  std::uint64_t mispeculation_extra_writes = 0;
  std::uint64_t cycles = 0;

  void record(EnergyEvent e, std::uint64_t n = 1);
  EnergyLedger& operator+=(const EnergyLedger& o);
  friend bool operator==(const EnergyLedger&, const EnergyLedger&) = default;
};

struct SliceEnergy {
  double read_pj = 0.0;   // per 64-byte block
  double write_pj = 0.0;  // per 64-byte block
  double static_mw = 0.0;
};

struct UnitEnergy {
  double read_pj = 0.0;
  double write_pj = 0.0;
  double static_mw = 0.0;
  double area_mm2 = 0.0;
  double access_ns = 0.0;
  int count = 1;
};

/// Timing, energy, power and area of the slice and the redirection hardware
/// (28 nm, 1 GHz). Defaults are the reference operating points; the smoothing
/// (600 mV) slice row is derived by voltage scaling from the nominal row.
struct EnergyConstants {
  double clock_ghz = 1.0;
  double nominal_vdd_mv = 720.0;
  double smoothing_vdd_mv = 600.0;
  // Override the derived (Vsmooth/Vnom)^2 and (Vsmooth/Vnom) factors.
  std::optional<double> suav_dynamic_scale;
  std::optional<double> suav_static_scale;

  SliceEnergy slice_conv{247.38, 302.23, 58.58};
  SliceEnergy slice_comun{84.38, 97.68, 30.79};
  SliceEnergy slice_agrupado{84.90, 99.76, 35.18};
  SliceEnergy slice_disperso{68.25, 78.33, 27.73};
  double slice_area_mm2 = 0.680;
  double slice_access_ns = 0.85;

  UnitEnergy com{0.0, 0.72, 6.67, 0.005, 0.95, 1};
  UnitEnergy des{0.62, 0.0, 7.14, 0.007, 0.95, 2};
  UnitEnergy tr{0.54, 0.50, 0.41, 0.005, 0.09, 1};
  UnitEnergy usr{0.0, 0.22, 15.41, 0.014, 0.11, 1};

  /// Per 64-byte LDS beat. Not tabulated; zero unless configured.
  double lds_access_pj = 0.0;

  double suav_dynamic_factor() const;
  double suav_static_factor() const;
  SliceEnergy slice_suav() const;
  /// Slice operating point of a scenario: Conventional -> nominal row,
  /// Smoothing -> derived row, fault scenarios -> their own rows.
  SliceEnergy slice_at(ScenarioKind kind) const;
  /// Static power of all redirection units, counting unit multiplicity.
  double rrcd_static_mw() const;
  double cycle_ns() const { return 1.0 / clock_ghz; }

  void validate() const;
};

std::string energy_constants_to_json(const EnergyConstants& c);
/// Missing keys keep their defaults. Throws ConfigError with `origin` on bad input.
EnergyConstants energy_constants_from_json(std::string_view text, std::string_view origin = "<string>");
EnergyConstants load_energy_constants(const std::string& path);

/// Energy breakdown in picojoules using the categories Static, Read, Write,
/// Com/Des, Redirections and LDS. Static is the slice leakage; the Com/Des and
/// Redirections categories carry their own leakage, kept apart in *_static_pj.
struct EnergyReport {
  double static_pj = 0.0;
  double read_pj = 0.0;
  double write_pj = 0.0;
  double comdes_pj = 0.0;
  double redirections_pj = 0.0;
  double lds_pj = 0.0;
  double comdes_static_pj = 0.0;
  double redirections_static_pj = 0.0;
  std::vector<std::string> warnings;

  double total_pj() const { return static_pj + read_pj + write_pj + comdes_pj + redirections_pj + lds_pj; }
  double leakage_pj() const { return static_pj + comdes_static_pj + redirections_static_pj; }
  double dynamic_pj() const { return total_pj() - leakage_pj(); }
};

EnergyReport finalize(const EnergyLedger& ledger, const EnergyConstants& constants, Mode mode,
                      ScenarioKind scenario);

struct AreaReport {
  double slice_mm2 = 0.0;
  double com_mm2 = 0.0;
  double des_mm2 = 0.0;
  double tr_mm2 = 0.0;
  double usr_mm2 = 0.0;
  double unit_sum_mm2 = 0.0;  // one of each unit
  double total_mm2 = 0.0;     // with unit multiplicity
  double unit_sum_overhead = 0.0;
  double overhead = 0.0;

  /// Overhead in percent rounded to one decimal.
  double overhead_percent_rounded() const;
};

AreaReport area_report(const EnergyConstants& constants);

}  // namespace rrcd
