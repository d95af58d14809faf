#pragma once

#include <bitset>
#include <cstdint>
#include <vector>

#include "rrcd/compression.hpp"
#include "rrcd/faultmap.hpp"

namespace rrcd {

/// The 64 KB register-file slice: 256 entries x 4 blocks x 64 bytes, with two
/// read ports and one write port per cycle.
///
/// Reading a faulty block returns the stored data with byte 0 inverted, so any
/// use of a faulty block shows up as a data mismatch. Writing a faulty block is
/// counted, and rejected when strict mode is on.
class SliceArray {
 public:
  static constexpr int kReadPorts = 2;
  static constexpr int kWritePorts = 1;
  static constexpr std::uint32_t kCorruptionMask = 0xFF;

  explicit SliceArray(FaultMap faults = {});

  /// Port-accounted access. Throws SimulationError on out-of-range indices or
  /// when the cycle's port budget is exceeded.
  Block read_block(int entry, int block);
  void write_block(int entry, int block, const Block& data);

  /// Functional access without port accounting (state dumps, tests).
  Block peek_block(int entry, int block) const;

  /// Starts a new cycle: resets the per-cycle port counters.
  void begin_cycle();

  void set_strict(bool strict) { strict_ = strict; }
  bool strict() const { return strict_; }

  const FaultMap& faults() const { return faults_; }

  int reads_this_cycle() const { return reads_this_cycle_; }
  int writes_this_cycle() const { return writes_this_cycle_; }
  std::uint64_t total_reads() const { return total_reads_; }
  std::uint64_t total_writes() const { return total_writes_; }
  std::uint64_t faulty_block_writes() const { return faulty_block_writes_; }
  std::uint64_t uninitialized_reads() const { return uninitialized_reads_; }

 private:
  static std::size_t index(int entry, int block);

  FaultMap faults_;
  std::vector<Block> storage_;
  std::bitset<kSliceBlocks> written_;
  bool strict_ = false;
  int reads_this_cycle_ = 0;
  int writes_this_cycle_ = 0;
  std::uint64_t total_reads_ = 0;
  std::uint64_t total_writes_ = 0;
  std::uint64_t faulty_block_writes_ = 0;
  std::uint64_t uninitialized_reads_ = 0;
};

}  // namespace rrcd
