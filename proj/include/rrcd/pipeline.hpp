#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rrcd/compression.hpp"
#include "rrcd/energy.hpp"
#include "rrcd/faultmap.hpp"
#include "rrcd/mode.hpp"
#include "rrcd/redirection.hpp"
#include "rrcd/slice.hpp"
#include "rrcd/windows.hpp"

namespace rrcd {

struct Marker {
  enum class Kind : std::uint8_t { Start, End };
  Kind kind = Kind::Start;
  int window = 0;  // Start only
};

/// One trace record: either a wavefront marker or an instruction whose
/// execute stage produces `dest_value`.
struct TraceInstruction {
  int wf = 0;
  std::optional<int> src0;
  std::optional<int> src1;
  std::optional<int> dest;
  std::optional<RegisterEntry> dest_value;
  std::optional<Marker> marker;
  std::size_t line = 0;  // 1-based source line, 0 when built in memory

  static TraceInstruction start(int wf, int window) { return {wf, {}, {}, {}, {}, Marker{Marker::Kind::Start, window}}; }
  static TraceInstruction end(int wf) { return {wf, {}, {}, {}, {}, Marker{Marker::Kind::End, 0}}; }
  static TraceInstruction op(int wf, std::optional<int> src0, std::optional<int> src1, std::optional<int> dest,
                             std::optional<RegisterEntry> value) {
    return {wf, src0, src1, dest, std::move(value), std::nullopt};
  }
};

using Trace = std::vector<TraceInstruction>;

/// Throws ConfigError (with line numbers when known) for: instructions outside
/// a started wavefront, a wavefront started twice, indices outside the window,
/// dest_value present without dest or vice versa.
void validate_trace(const Trace& trace);

/// Staging buffer for the destination register while its compressibility
/// verdict is pending; drained block by block after a mispeculation.
class DestRegisterBuffer {
 public:
  void push(int block_index, const Block& b);
  const Block& block(int i) const { return blocks_[static_cast<std::size_t>(i)]; }
  int fill_count() const { return fill_; }
  bool full() const { return fill_ == 4; }
  void clear() { fill_ = 0; }

 private:
  std::array<Block, 4> blocks_{};
  int fill_ = 0;
};

struct RunConfig {
  Mode mode = Mode::Rrcd;
  ScenarioKind scenario = ScenarioKind::Comun;
  std::uint64_t seed = 0;
  /// Replaces the map generated from (scenario, seed).
  std::optional<FaultMap> fault_map;
  int max_wavefronts = 16;
  std::size_t lds_bytes = SpillPartition::kDefaultLdsBytes;
  int lds_latency = 1;          // cycles per 64-byte LDS beat
  int extra_slice_latency = 0;  // additional pipeline stages in RRCD mode
  bool debug_invariants = false;
  std::optional<std::uint64_t> dump_tr_cycle;
  bool record_timeline = false;

  void validate() const;
};

struct WriteBreakdown {
  std::uint64_t regular = 0;
  std::uint64_t redirect_to_reliable = 0;
  std::uint64_t redirect_to_faulty = 0;
  std::uint64_t lds_spill = 0;

  std::uint64_t total() const { return regular + redirect_to_reliable + redirect_to_faulty + lds_spill; }
  void add(WriteKind k);
};

enum class OccupancyClass : std::uint8_t { ReliableCompressed, ReliableUncompressed, FaultyCompressed, FaultyUncompressed };

/// Per-cycle samples of live registers by (home entry reliability, compressed).
struct OccupancyHistogram {
  std::array<std::uint64_t, 4> entry_cycles{};
  std::uint64_t sampled_cycles = 0;

  /// Average fraction of the 256 slice entries in class `c` per cycle.
  double fraction(OccupancyClass c) const;
  double utilization() const;
};

struct StallCounts {
  std::uint64_t raw_hazard = 0;     // issue slot free, every ready wavefront blocked by a dependence
  std::uint64_t idle = 0;           // issue slot free, nothing to issue
  std::uint64_t mispeculation = 0;  // frozen while the BRD drains
  std::uint64_t lds = 0;            // frozen on spill transfers
};

struct InstructionTiming {
  std::size_t trace_index = 0;
  int wf = 0;
  std::uint64_t issue_cycle = 0;
  std::uint64_t retire_cycle = 0;
};

struct SimReport {
  Mode mode = Mode::Rrcd;
  ScenarioKind scenario = ScenarioKind::Comun;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  int pipeline_latency = 0;

  std::uint64_t cycles = 0;
  std::uint64_t instructions = 0;
  std::uint64_t dest_writes = 0;
  WriteBreakdown writes;
  /// Writes to a register with no prior value; these are never regular.
  std::uint64_t first_writes = 0;
  std::uint64_t mispeculations = 0;
  OccupancyHistogram occupancy;
  StallCounts stalls;
  std::uint64_t read_port_cycles = 0;
  std::uint64_t write_port_cycles = 0;
  EnergyLedger ledger;

  double faulty_fraction = 0.0;
  int faulty_blocks = 0;
  int final_occupied_blocks = 0;
  int peak_spill_slots = 0;
  std::uint64_t faulty_block_writes = 0;
  std::uint64_t integrity_violations = 0;
  std::uint64_t invariant_violations = 0;
  std::uint64_t invariant_checks = 0;
  std::string first_invariant_violation;

  /// (wavefront, logical register) -> value at wavefront end.
  std::map<std::pair<int, int>, RegisterEntry> final_state;
  std::vector<InstructionTiming> timeline;
  std::string tr_dump;

  /// Regular share of the writes that had a prior value.
  double steady_regular_fraction() const;
};

/// Cycle-level model of one SIMD unit and its register-file slice.
class Pipeline {
 public:
  Pipeline(Trace trace, RunConfig config);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  /// Advances one cycle.
  void step();
  bool done() const;
  /// Steps until done and returns the final report.
  SimReport finish();

  std::uint64_t cycle() const;
  const SimReport& report() const;
  const SliceArray& slice() const;
  /// Null outside RRCD mode.
  const RedirectionUnit* redirection() const;
  const BaseRegisterTable& windows() const;
  /// Cycles from issue to the end of the last writeback of an instruction.
  int latency() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SimReport run(const Trace& trace, const RunConfig& config);

/// FNV-1a fingerprint of the configuration and trace contents.
std::uint64_t config_hash(const Trace& trace, const RunConfig& config);

}  // namespace rrcd
