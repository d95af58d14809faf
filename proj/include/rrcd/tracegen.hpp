#pragma once

#include <array>
#include <cstdint>

#include "rrcd/pipeline.hpp"

namespace rrcd {

/// Index into TraceProfile::mix.
enum class ValueKind : std::uint8_t { Scalar, Stride, TwoDelta, Raw };

/// Synthetic workload description.
///
/// Each rewrite of a register keeps its compressibility with probability
/// 1 - state_change_prob; the switching rates are balanced so the stationary
/// share of compressible values equals the compressible mass of `mix`.
struct TraceProfile {
  int wavefronts = 16;
  int window = 16;
  int instructions_per_wavefront = 256;
  std::array<double, 4> mix{0.25, 0.25, 0.25, 0.25};
  double state_change_prob = 0.0;
  /// Share of Raw values whose block 0 still fits a pattern (compressor mispeculation).
  double raw_regular_block0_prob = 0.0;
  int sources_per_instruction = 2;
  std::uint64_t seed = 1;

  /// Throws ConfigError on an invalid mix, probabilities outside [0, 1], a
  /// state-change rate the mix cannot sustain, or windows exceeding 256 entries.
  void validate() const;
};

struct TraceGenStats {
  std::array<std::uint64_t, 4> realized{};  // by ValueKind, classified with try_compress
  std::uint64_t dest_writes = 0;
  std::uint64_t state_changes = 0;
  std::uint64_t regular_block0_raw = 0;

  double realized_fraction(ValueKind k) const;
  double compressible_fraction() const;
  /// Uncompressed bytes over stored bytes (64 per compressed value, 256 otherwise).
  double compression_ratio() const;
};

struct GeneratedTrace {
  Trace trace;
  TraceGenStats stats;
};

/// Deterministic for a fixed profile. Lines: every start marker, then the
/// wavefronts' instructions interleaved round-robin, then every end marker.
GeneratedTrace generate_trace(const TraceProfile& profile);

}  // namespace rrcd
