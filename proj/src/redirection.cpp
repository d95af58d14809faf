#include "rrcd/redirection.hpp"

#include <sstream>

#include "rrcd/errors.hpp"

namespace rrcd {

std::uint16_t TRRow::pack() const {
  std::uint16_t bits = 0;
  bits |= valid ? 1u : 0u;
  bits |= (compressed ? 1u : 0u) << 1;
  bits |= (spilled ? 1u : 0u) << 2;
  bits |= static_cast<std::uint16_t>(entry_index) << 3;
  bits |= static_cast<std::uint16_t>(block_index & 0x3) << 11;
  return bits;
}

TRRow TRRow::unpack(std::uint16_t bits) {
  if (bits >> kTrRowBits) throw DecodeError("TR row image wider than 13 bits");
  TRRow r;
  r.valid = bits & 1u;
  r.compressed = (bits >> 1) & 1u;
  r.spilled = (bits >> 2) & 1u;
  r.entry_index = static_cast<std::uint8_t>(bits >> 3);
  r.block_index = static_cast<std::uint8_t>((bits >> 11) & 0x3);
  return r;
}

std::size_t RedirectionTable::index(int phys) {
  if (phys < 0 || phys >= kTrRows) throw SimulationError("TR row out of range: " + std::to_string(phys));
  return static_cast<std::size_t>(phys);
}

const TRRow& RedirectionTable::at(int phys) const { return rows_[index(phys)]; }

void RedirectionTable::set(int phys, const TRRow& row) { rows_[index(phys)] = row; }

UsrBitmap::UsrBitmap(const FaultMap& faults) : bits_(faults.blocks()), faulty_(faults.blocks()) {
  for (int e = 0; e < kSliceEntries; ++e) faulty_entries_.set(static_cast<std::size_t>(e), faults.has_fault(e));
}

bool UsrBitmap::entry_free(int entry) const {
  for (int b = 0; b < kBlocksPerEntry; ++b) {
    if (occupied({entry, b})) return false;
  }
  return true;
}

void UsrBitmap::occupy(BlockAddr a) {
  const auto i = static_cast<std::size_t>(a.flat());
  if (bits_.test(i)) {
    throw SimulationError("USR double allocation of entry " + std::to_string(a.entry) + " block " +
                          std::to_string(a.block));
  }
  bits_.set(i);
}

void UsrBitmap::free(BlockAddr a) {
  const auto i = static_cast<std::size_t>(a.flat());
  if (faulty_.test(i)) {
    throw SimulationError("USR free of faulty block: entry " + std::to_string(a.entry) + " block " +
                          std::to_string(a.block));
  }
  if (!bits_.test(i)) {
    throw SimulationError("USR free of unoccupied block: entry " + std::to_string(a.entry) + " block " +
                          std::to_string(a.block));
  }
  bits_.reset(i);
}

void UsrBitmap::occupy_entry(int entry) {
  for (int b = 0; b < kBlocksPerEntry; ++b) occupy({entry, b});
}

void UsrBitmap::free_entry(int entry) {
  for (int b = 0; b < kBlocksPerEntry; ++b) free({entry, b});
}

std::optional<BlockAddr> UsrBitmap::select_faulty_entry_block() const {
  for (int i = 0; i < kSliceBlocks; ++i) {
    if (faulty_entries_.test(static_cast<std::size_t>(i / kBlocksPerEntry)) && !bits_.test(static_cast<std::size_t>(i))) {
      return BlockAddr::from_flat(i);
    }
  }
  return std::nullopt;
}

std::optional<BlockAddr> UsrBitmap::select_compressed_slot() const {
  if (auto a = select_faulty_entry_block()) return a;
  for (int e = 0; e < kSliceEntries; ++e) {
    if (!entry_reliable(e) || entry_free(e)) continue;
    for (int b = 0; b < kBlocksPerEntry; ++b) {
      if (!occupied({e, b})) return BlockAddr{e, b};
    }
  }
  if (auto e = select_reliable_entry()) return BlockAddr{*e, 0};
  return std::nullopt;
}

std::optional<int> UsrBitmap::select_reliable_entry() const {
  for (int e = 0; e < kSliceEntries; ++e) {
    if (entry_reliable(e) && entry_free(e)) return e;
  }
  return std::nullopt;
}

SpillPartition::SpillPartition(std::size_t lds_bytes) : base_address_(lds_bytes / 2) {
  const std::size_t slots = (lds_bytes / 2) / kEntryBytes;
  if (slots > 256) {
    throw ConfigError("spill partition of " + std::to_string(slots) + " slots exceeds the 8-bit TR offset");
  }
  storage_.resize(slots);
  for (int s = 0; s < static_cast<int>(slots); ++s) free_.insert(s);
}

std::optional<int> SpillPartition::allocate() {
  if (free_.empty()) return std::nullopt;
  const int slot = *free_.begin();
  free_.erase(free_.begin());
  peak_ = std::max(peak_, allocated_count());
  return slot;
}

void SpillPartition::check(int slot) const {
  if (!allocated(slot)) throw SimulationError("spill slot " + std::to_string(slot) + " is not allocated");
}

void SpillPartition::release(int slot) {
  check(slot);
  free_.insert(slot);
}

bool SpillPartition::allocated(int slot) const {
  return slot >= 0 && slot < capacity() && free_.count(slot) == 0;
}

std::vector<int> SpillPartition::allocated_slots() const {
  std::vector<int> out;
  for (int s = 0; s < capacity(); ++s) {
    if (allocated(s)) out.push_back(s);
  }
  return out;
}

std::uint64_t SpillPartition::address(int slot) const {
  if (slot < 0 || slot >= capacity()) throw SimulationError("spill slot out of range: " + std::to_string(slot));
  return base_address_ + static_cast<std::uint64_t>(slot) * kEntryBytes;
}

RegisterEntry SpillPartition::read(int slot) const {
  check(slot);
  return storage_[static_cast<std::size_t>(slot)];
}

void SpillPartition::write(int slot, const RegisterEntry& value) {
  check(slot);
  storage_[static_cast<std::size_t>(slot)] = value;
}

std::string_view to_string(WriteKind k) {
  switch (k) {
    case WriteKind::Regular: return "regular";
    case WriteKind::RedirectReliable: return "redirect_to_reliable";
    case WriteKind::RedirectFaulty: return "redirect_to_faulty";
    case WriteKind::LdsSpill: return "lds_spill";
  }
  return "?";
}

RedirectionUnit::RedirectionUnit(const FaultMap& faults, std::size_t lds_bytes)
    : faults_(faults), bitmap_(faults), spill_(lds_bytes) {}

const TRRow& RedirectionUnit::tr_lookup_source(int phys) const {
  const TRRow& row = table_.at(phys);
  if (!row.valid) throw SimulationError("read before write of physical register " + std::to_string(phys));
  return row;
}

void RedirectionUnit::hold(BlockAddr a) {
  bitmap_.occupy(a);
  held_.set(static_cast<std::size_t>(a.flat()));
}

void RedirectionUnit::unhold(BlockAddr a) { held_.reset(static_cast<std::size_t>(a.flat())); }

PreemptiveRedirection RedirectionUnit::usr_prealloc(const TRRow& current) {
  const bool fresh = !current.valid || current.spilled;
  const bool want_reliable = fresh || current.compressed;
  const bool want_compressed = fresh || !current.compressed;
  PreemptiveRedirection pre;
  if (want_reliable) {
    if (auto e = bitmap_.select_reliable_entry()) {
      for (int b = 0; b < kBlocksPerEntry; ++b) hold({*e, b});
      pre.reliable_entry = e;
    }
  }
  if (want_compressed) {
    if (auto a = bitmap_.select_compressed_slot()) {
      hold(*a);
      pre.compressed_slot = a;
    }
  }
  return pre;
}

void RedirectionUnit::release_holds(PreemptiveRedirection& pre) {
  if (pre.compressed_slot) {
    unhold(*pre.compressed_slot);
    bitmap_.free(*pre.compressed_slot);
    pre.compressed_slot.reset();
  }
  if (pre.reliable_entry) {
    for (int b = 0; b < kBlocksPerEntry; ++b) unhold({*pre.reliable_entry, b});
    bitmap_.free_entry(*pre.reliable_entry);
    pre.reliable_entry.reset();
  }
}

void RedirectionUnit::free_location(const TRRow& row, ReleaseSummary* summary) {
  if (!row.valid) return;
  if (row.spilled) {
    spill_.release(row.entry_index);
    if (summary) ++summary->spill_slots_freed;
  } else if (row.compressed) {
    bitmap_.free({row.entry_index, row.block_index});
    if (summary) summary->blocks_freed += 1;
  } else {
    bitmap_.free_entry(row.entry_index);
    if (summary) summary->blocks_freed += kBlocksPerEntry;
  }
}

CommitResult RedirectionUnit::usr_commit(int phys, bool c_compr, PreemptiveRedirection& pre) {
  const TRRow prev = table_.at(phys);
  CommitResult result{prev, prev, false, WriteKind::Regular};
  if (prev.valid && !prev.spilled && prev.compressed == c_compr) {
    release_holds(pre);
    return result;
  }

  TRRow next;
  next.valid = true;
  next.compressed = c_compr;
  bool placed = false;
  if (c_compr && pre.compressed_slot) {
    const BlockAddr a = *pre.compressed_slot;
    unhold(a);
    pre.compressed_slot.reset();
    next.entry_index = static_cast<std::uint8_t>(a.entry);
    next.block_index = static_cast<std::uint8_t>(a.block);
    result.kind = faults_.has_fault(a.entry) ? WriteKind::RedirectFaulty : WriteKind::RedirectReliable;
    placed = true;
  } else if (!c_compr && pre.reliable_entry) {
    const int e = *pre.reliable_entry;
    for (int b = 0; b < kBlocksPerEntry; ++b) unhold({e, b});
    pre.reliable_entry.reset();
    next.entry_index = static_cast<std::uint8_t>(e);
    result.kind = WriteKind::RedirectReliable;
    placed = true;
  }
  release_holds(pre);

  bool keeps_slot = false;
  if (!placed) {
    result.kind = WriteKind::LdsSpill;
    next.spilled = true;
    if (prev.valid && prev.spilled) {
      next.entry_index = prev.entry_index;
      keeps_slot = true;
    } else {
      const auto slot = spill_.allocate();
      if (!slot) {
        throw SimulationError("spill partition exhausted (" + std::to_string(spill_.capacity()) +
                              " slots) while redirecting physical register " + std::to_string(phys));
      }
      next.entry_index = static_cast<std::uint8_t>(*slot);
      pre.spill_slot = slot;
    }
  }
  if (!keeps_slot) free_location(prev, nullptr);

  table_.set(phys, next);
  result.row = next;
  result.rsel = !keeps_slot;
  return result;
}

ReleaseSummary RedirectionUnit::release_window(int wf_id, const BaseRegisterTable& windows) {
  const auto& w = windows.window(wf_id);
  return release_rows(w.base, w.length);
}

ReleaseSummary RedirectionUnit::release_rows(int base, int length) {
  ReleaseSummary summary;
  for (int phys = base; phys < base + length; ++phys) {
    const TRRow row = table_.at(phys);
    if (!row.valid) continue;
    free_location(row, &summary);
    table_.set(phys, TRRow{});
    ++summary.rows_invalidated;
  }
  return summary;
}

std::optional<std::string> RedirectionUnit::check_invariants() const {
  std::bitset<kSliceBlocks> expected = bitmap_.faulty() | held_;
  if ((bitmap_.faulty() & held_).any()) return "a preemptive hold covers a faulty block";
  std::vector<bool> slot_used(static_cast<std::size_t>(spill_.capacity()), false);
  const auto& rows = table_.rows();
  for (int phys = 0; phys < kTrRows; ++phys) {
    const TRRow& r = rows[static_cast<std::size_t>(phys)];
    if (!r.valid) continue;
    if (r.spilled) {
      if (r.entry_index >= spill_.capacity() || !spill_.allocated(r.entry_index)) {
        return "row " + std::to_string(phys) + " references unallocated spill slot " + std::to_string(r.entry_index);
      }
      if (slot_used[r.entry_index]) return "spill slot " + std::to_string(r.entry_index) + " shared by two rows";
      slot_used[r.entry_index] = true;
      continue;
    }
    const int first = r.compressed ? r.block_index : 0;
    const int count = r.compressed ? 1 : kBlocksPerEntry;
    for (int b = first; b < first + count; ++b) {
      const auto i = static_cast<std::size_t>(BlockAddr{r.entry_index, b}.flat());
      if (bitmap_.faulty().test(i)) {
        return "row " + std::to_string(phys) + " maps onto faulty block " + std::to_string(r.entry_index) + "/" +
               std::to_string(b);
      }
      if (expected.test(i)) {
        return "row " + std::to_string(phys) + " overlaps another allocation at block " +
               std::to_string(r.entry_index) + "/" + std::to_string(b);
      }
      expected.set(i);
    }
  }
  if (expected != bitmap_.bits()) {
    const auto diff = expected ^ bitmap_.bits();
    for (int i = 0; i < kSliceBlocks; ++i) {
      if (diff.test(static_cast<std::size_t>(i))) {
        const auto a = BlockAddr::from_flat(i);
        return std::string(bitmap_.bits().test(static_cast<std::size_t>(i)) ? "leaked" : "unaccounted") +
               " bitmap block " + std::to_string(a.entry) + "/" + std::to_string(a.block);
      }
    }
  }
  for (int s = 0; s < spill_.capacity(); ++s) {
    if (spill_.allocated(s) && !slot_used[static_cast<std::size_t>(s)]) {
      return "spill slot " + std::to_string(s) + " allocated but unreferenced";
    }
  }
  return std::nullopt;
}

std::string RedirectionUnit::dump_csv() const {
  std::ostringstream os;
  os << "phys_reg,v,c,m,entry,block\n";
  const auto& rows = table_.rows();
  for (int phys = 0; phys < kTrRows; ++phys) {
    const TRRow& r = rows[static_cast<std::size_t>(phys)];
    if (!r.valid) continue;
    os << phys << ',' << int{r.valid} << ',' << int{r.compressed} << ',' << int{r.spilled} << ','
       << int{r.entry_index} << ',' << int{r.block_index} << '\n';
  }
  return os.str();
}

}  // namespace rrcd
