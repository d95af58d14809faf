#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rrcd/compression.hpp"
#include "rrcd/faultmap.hpp"
#include "rrcd/windows.hpp"

namespace rrcd {

struct BlockAddr {
  int entry = 0;
  int block = 0;

  int flat() const { return entry * kBlocksPerEntry + block; }
  static BlockAddr from_flat(int i) { return {i / kBlocksPerEntry, i % kBlocksPerEntry}; }
  friend bool operator==(const BlockAddr&, const BlockAddr&) = default;
};

inline constexpr int kTrRows = 256;
inline constexpr int kTrRowBits = 13;
inline constexpr int kTrBytes = kTrRows * kTrRowBits / 8;
static_assert(kTrBytes == 416);

/// One redirection-table row. entry_index is a slice entry when spilled is
/// false and a spill-partition slot otherwise; block_index is meaningful only
/// for compressed, non-spilled registers.
struct TRRow {
  bool valid = false;
  bool compressed = false;
  bool spilled = false;
  std::uint8_t entry_index = 0;
  std::uint8_t block_index = 0;

  /// 13-bit image: [0] v, [1] c, [2] m, [10:3] entry, [12:11] block.
  std::uint16_t pack() const;
  static TRRow unpack(std::uint16_t bits);

  friend bool operator==(const TRRow&, const TRRow&) = default;
};

class RedirectionTable {
 public:
  const TRRow& at(int phys) const;
  void set(int phys, const TRRow& row);
  const std::array<TRRow, kTrRows>& rows() const { return rows_; }

 private:
  static std::size_t index(int phys);
  std::array<TRRow, kTrRows> rows_{};
};

/// USR occupancy bitmap with the two priority-encoder selectors.
/// A set bit means the block is faulty, holds data, or is held for an
/// in-flight instruction. Faulty blocks are set at construction and never cleared.
class UsrBitmap {
 public:
  explicit UsrBitmap(const FaultMap& faults);

  bool occupied(BlockAddr a) const { return bits_.test(static_cast<std::size_t>(a.flat())); }
  bool entry_free(int entry) const;
  bool entry_reliable(int entry) const { return !faulty_entries_.test(static_cast<std::size_t>(entry)); }

  /// Throws SimulationError when the block is already occupied.
  void occupy(BlockAddr a);
  /// Throws SimulationError when freeing a faulty or already free block.
  void free(BlockAddr a);
  void occupy_entry(int entry);
  void free_entry(int entry);

  /// Lowest free block of an entry with at least one faulty block.
  std::optional<BlockAddr> select_faulty_entry_block() const;
  /// Faulty-entry block first, then a free block of a partially occupied
  /// reliable entry, then block 0 of a fully free reliable entry.
  std::optional<BlockAddr> select_compressed_slot() const;
  /// Lowest reliable entry with all four blocks free.
  std::optional<int> select_reliable_entry() const;

  int occupied_count() const { return static_cast<int>(bits_.count()); }
  const std::bitset<kSliceBlocks>& bits() const { return bits_; }
  const std::bitset<kSliceBlocks>& faulty() const { return faulty_; }

 private:
  std::bitset<kSliceBlocks> bits_;
  std::bitset<kSliceBlocks> faulty_;
  std::bitset<kSliceEntries> faulty_entries_;
};

/// Spill backing store: the upper half of the LDS, organised as a contiguous
/// array of 256-byte uncompressed register images.
class SpillPartition {
 public:
  static constexpr std::size_t kDefaultLdsBytes = 64 * 1024;

  explicit SpillPartition(std::size_t lds_bytes = kDefaultLdsBytes);

  int capacity() const { return static_cast<int>(storage_.size()); }
  /// Lowest free slot, nullopt when exhausted.
  std::optional<int> allocate();
  /// Throws SimulationError for an unallocated slot.
  void release(int slot);
  bool allocated(int slot) const;
  int allocated_count() const { return capacity() - static_cast<int>(free_.size()); }
  int peak_allocated() const { return peak_; }
  std::vector<int> allocated_slots() const;

  std::uint64_t base_address() const { return base_address_; }
  std::uint64_t address(int slot) const;

  /// Throws SimulationError for an unallocated slot.
  RegisterEntry read(int slot) const;
  void write(int slot, const RegisterEntry& value);

 private:
  void check(int slot) const;

  std::uint64_t base_address_;
  std::vector<RegisterEntry> storage_;
  std::set<int> free_;
  int peak_ = 0;
};

/// Redirections obtained while an instruction travels the pipeline.
struct PreemptiveRedirection {
  std::optional<BlockAddr> compressed_slot;
  std::optional<int> reliable_entry;
  std::optional<int> spill_slot;

  int allocations() const { return (compressed_slot ? 1 : 0) + (reliable_entry ? 1 : 0); }
};

enum class WriteKind : std::uint8_t { Regular, RedirectReliable, RedirectFaulty, LdsSpill };
std::string_view to_string(WriteKind k);

struct CommitResult {
  TRRow previous;
  TRRow row;
  bool rsel = false;  // true: the write port follows the USR's new redirection
  WriteKind kind = WriteKind::Regular;
};

struct ReleaseSummary {
  int rows_invalidated = 0;
  int blocks_freed = 0;
  int spill_slots_freed = 0;
};

/// Redirection table, selection unit and spill partition of one slice.
class RedirectionUnit {
 public:
  explicit RedirectionUnit(const FaultMap& faults, std::size_t lds_bytes = SpillPartition::kDefaultLdsBytes);

  const TRRow& tr_lookup(int phys) const { return table_.at(phys); }
  /// Like tr_lookup, but a row with v=0 is a read before write (SimulationError).
  const TRRow& tr_lookup_source(int phys) const;

  /// Reserves the complementary redirection(s) for a destination with TR state
  /// `current`. Reserved blocks are marked occupied immediately.
  PreemptiveRedirection usr_prealloc(const TRRow& current);

  /// Resolves the destination location once its compression state is known,
  /// consuming at most one held allocation and releasing the rest.
  /// Throws SimulationError when a spill slot is needed and none is free.
  CommitResult usr_commit(int phys, bool c_compr, PreemptiveRedirection& pre);

  /// Drops every hold in `pre` without consuming any.
  void release_holds(PreemptiveRedirection& pre);

  /// Invalidates the rows of a finished wavefront and frees their storage.
  /// Throws ConfigError for a wavefront without a window.
  ReleaseSummary release_window(int wf_id, const BaseRegisterTable& windows);
  ReleaseSummary release_rows(int base, int length);

  /// First violated bitmap/TR invariant, if any.
  std::optional<std::string> check_invariants() const;

  /// CSV of valid rows: phys_reg,v,c,m,entry,block
  std::string dump_csv() const;

  const RedirectionTable& table() const { return table_; }
  const UsrBitmap& bitmap() const { return bitmap_; }
  const SpillPartition& spill() const { return spill_; }
  SpillPartition& spill() { return spill_; }
  const FaultMap& faults() const { return faults_; }
  int held_blocks() const { return static_cast<int>(held_.count()); }

 private:
  void hold(BlockAddr a);
  void unhold(BlockAddr a);
  void free_location(const TRRow& row, ReleaseSummary* summary);

  FaultMap faults_;
  RedirectionTable table_;
  UsrBitmap bitmap_;
  SpillPartition spill_;
  std::bitset<kSliceBlocks> held_;
};

}  // namespace rrcd
