#include "rrcd/slice.hpp"

#include <string>
#include <utility>

#include "rrcd/errors.hpp"

namespace rrcd {

SliceArray::SliceArray(FaultMap faults)
    : faults_(std::move(faults)), storage_(static_cast<std::size_t>(kSliceBlocks), Block{}) {}

std::size_t SliceArray::index(int entry, int block) {
  if (entry < 0 || entry >= kSliceEntries || block < 0 || block >= kBlocksPerEntry) {
    throw SimulationError("slice access out of range: entry " + std::to_string(entry) + " block " +
                          std::to_string(block));
  }
  return static_cast<std::size_t>(entry * kBlocksPerEntry + block);
}

Block SliceArray::peek_block(int entry, int block) const {
  const auto i = index(entry, block);
  Block out = storage_[i];
  if (faults_.blocks().test(i)) out[0] ^= kCorruptionMask;
  return out;
}

Block SliceArray::read_block(int entry, int block) {
  const auto i = index(entry, block);
  if (reads_this_cycle_ == kReadPorts) {
    throw SimulationError("structural hazard: more than two slice reads in one cycle");
  }
  ++reads_this_cycle_;
  ++total_reads_;
  if (!written_.test(i)) ++uninitialized_reads_;
  return peek_block(entry, block);
}

void SliceArray::write_block(int entry, int block, const Block& data) {
  const auto i = index(entry, block);
  if (writes_this_cycle_ == kWritePorts) {
    throw SimulationError("structural hazard: more than one slice write in one cycle");
  }
  if (faults_.blocks().test(i)) {
    ++faulty_block_writes_;
    if (strict_) {
      throw SimulationError("write to faulty block: entry " + std::to_string(entry) + " block " +
                            std::to_string(block));
    }
  }
  ++writes_this_cycle_;
  ++total_writes_;
  storage_[i] = data;
  written_.set(i);
}

void SliceArray::begin_cycle() {
  reads_this_cycle_ = 0;
  writes_this_cycle_ = 0;
}

}  // namespace rrcd
