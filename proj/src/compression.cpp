#include "rrcd/compression.hpp"

#include <algorithm>

#include "rrcd/errors.hpp"

namespace rrcd {

namespace {

constexpr bool fits_int8(std::int32_t v) { return v >= -128 && v <= 127; }

std::uint32_t lane_value(const CompressedReg& c, int k) {
  const auto d1 = static_cast<std::uint32_t>(static_cast<std::int32_t>(c.delta1));
  const auto d2 = static_cast<std::uint32_t>(static_cast<std::int32_t>(c.delta2));
  const auto uk = static_cast<std::uint32_t>(k);
  switch (c.pattern) {
    case Pattern::Scalar: return c.base;
    case Pattern::Stride: return c.base + uk * d1;
    case Pattern::TwoDelta: {
      const auto g = static_cast<std::uint32_t>(c.group_len());
      return c.base + (uk % g) * d1 + (uk / g) * d2;
    }
  }
  throw DecodeError("invalid pattern tag");
}

template <std::size_t N>
bool matches(const CompressedReg& c, std::span<const std::uint32_t, N> lanes) {
  for (std::size_t k = 0; k < N; ++k) {
    if (lanes[k] != lane_value(c, static_cast<int>(k))) return false;
  }
  return true;
}

template <std::size_t N>
std::optional<CompressedReg> stride_candidate(std::span<const std::uint32_t, N> lanes) {
  const auto d = static_cast<std::int32_t>(lanes[1] - lanes[0]);
  if (!fits_int8(d)) return std::nullopt;
  CompressedReg c{Pattern::Stride, lanes[0], static_cast<std::int8_t>(d), 0, 0};
  if (!matches(c, lanes)) return std::nullopt;
  return c;
}

template <std::size_t N>
std::optional<CompressedReg> two_delta_candidate(std::span<const std::uint32_t, N> lanes, int log2) {
  const auto g = static_cast<std::size_t>(1) << log2;
  if (g >= N) return std::nullopt;
  const auto d1 = static_cast<std::int32_t>(lanes[1] - lanes[0]);
  const auto d2 = static_cast<std::int32_t>(lanes[g] - lanes[0]);
  if (!fits_int8(d1) || !fits_int8(d2)) return std::nullopt;
  CompressedReg c{Pattern::TwoDelta, lanes[0], static_cast<std::int8_t>(d1), static_cast<std::int8_t>(d2),
                  static_cast<std::uint8_t>(log2)};
  if (!matches(c, lanes)) return std::nullopt;
  return c;
}

int hex_digit(char ch) {
  if (ch >= '0' && ch <= '9') return ch - '0';
  if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
  if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
  return -1;
}

}  // namespace

std::span<const std::uint32_t, kLanesPerBlock> RegisterEntry::block(int i) const {
  if (i < 0 || i >= 4) throw ConfigError("block index out of range");
  return std::span<const std::uint32_t, kLanesPerBlock>(lanes.data() + i * kLanesPerBlock, kLanesPerBlock);
}

Block RegisterEntry::block_copy(int i) const {
  Block b;
  const auto src = block(i);
  std::copy(src.begin(), src.end(), b.begin());
  return b;
}

void RegisterEntry::set_block(int i, const Block& b) {
  if (i < 0 || i >= 4) throw ConfigError("block index out of range");
  std::copy(b.begin(), b.end(), lanes.begin() + i * kLanesPerBlock);
}

std::array<std::uint8_t, kEntryBytes> RegisterEntry::to_bytes() const {
  std::array<std::uint8_t, kEntryBytes> out{};
  for (std::size_t k = 0; k < lanes.size(); ++k) {
    for (std::size_t b = 0; b < 4; ++b) out[4 * k + b] = static_cast<std::uint8_t>(lanes[k] >> (8 * b));
  }
  return out;
}

RegisterEntry RegisterEntry::from_bytes(std::span<const std::uint8_t, kEntryBytes> bytes) {
  RegisterEntry e;
  for (std::size_t k = 0; k < e.lanes.size(); ++k) {
    std::uint32_t v = 0;
    for (std::size_t b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[4 * k + b]) << (8 * b);
    e.lanes[k] = v;
  }
  return e;
}

std::string RegisterEntry::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * kEntryBytes);
  for (std::uint8_t byte : to_bytes()) {
    out.push_back(kDigits[byte >> 4]);
    out.push_back(kDigits[byte & 0xF]);
  }
  return out;
}

RegisterEntry RegisterEntry::from_hex(std::string_view hex) {
  if (hex.size() != 2 * kEntryBytes) {
    throw ConfigError("register hex must be 512 digits, got " + std::to_string(hex.size()));
  }
  std::array<std::uint8_t, kEntryBytes> bytes{};
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const int hi = hex_digit(hex[2 * i]);
    const int lo = hex_digit(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw ConfigError("non-hex character in register value");
    bytes[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return from_bytes(bytes);
}

std::string_view to_string(Pattern p) {
  switch (p) {
    case Pattern::Scalar: return "scalar";
    case Pattern::Stride: return "stride";
    case Pattern::TwoDelta: return "twodelta";
  }
  return "?";
}

void CompressedReg::validate() const {
  switch (pattern) {
    case Pattern::Scalar:
      if (delta1 != 0 || delta2 != 0 || group_log2 != 0) throw DecodeError("scalar encoding with non-zero fields");
      return;
    case Pattern::Stride:
      if (delta2 != 0 || group_log2 != 0) throw DecodeError("stride encoding with second delta or group");
      return;
    case Pattern::TwoDelta:
      if (group_log2 < 1 || group_log2 > kMaxGroupLog2) {
        throw DecodeError("two-delta group length 2^" + std::to_string(group_log2) + " out of range");
      }
      return;
  }
  throw DecodeError("invalid pattern tag " + std::to_string(static_cast<int>(pattern)));
}

std::array<std::uint8_t, kCompressedBytes> CompressedReg::serialize() const {
  validate();
  std::uint64_t w = static_cast<std::uint64_t>(pattern) & 0x3;
  w |= static_cast<std::uint64_t>(base) << 2;
  w |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(delta1)) << 34;
  w |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(delta2)) << 42;
  w |= static_cast<std::uint64_t>(group_log2 & 0x1F) << 50;
  std::array<std::uint8_t, kCompressedBytes> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>(w >> (8 * i));
  return out;
}

CompressedReg CompressedReg::deserialize(std::span<const std::uint8_t, kCompressedBytes> bytes) {
  std::uint64_t w = 0;
  for (std::size_t i = 0; i < bytes.size(); ++i) w |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  if (w >> 55) throw DecodeError("reserved bits set in compressed register");
  const auto tag = static_cast<unsigned>(w & 0x3);
  if (tag == 3) throw DecodeError("invalid pattern tag 3");
  CompressedReg c;
  c.pattern = static_cast<Pattern>(tag);
  c.base = static_cast<std::uint32_t>(w >> 2);
  c.delta1 = static_cast<std::int8_t>(static_cast<std::uint8_t>(w >> 34));
  c.delta2 = static_cast<std::int8_t>(static_cast<std::uint8_t>(w >> 42));
  c.group_log2 = static_cast<std::uint8_t>((w >> 50) & 0x1F);
  c.validate();
  return c;
}

Block CompressedReg::to_block() const {
  const auto bytes = serialize();
  Block b{};
  for (std::size_t i = 0; i < bytes.size(); ++i) b[i / 4] |= static_cast<std::uint32_t>(bytes[i]) << (8 * (i % 4));
  return b;
}

CompressedReg CompressedReg::from_block(const Block& b) {
  std::array<std::uint8_t, kCompressedBytes> bytes{};
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = static_cast<std::uint8_t>(b[i / 4] >> (8 * (i % 4)));
  return deserialize(bytes);
}

std::optional<CompressedReg> try_compress(const RegisterEntry& entry) {
  const std::span<const std::uint32_t, kLanes> lanes(entry.lanes);
  if (std::all_of(lanes.begin(), lanes.end(), [&](std::uint32_t v) { return v == lanes[0]; })) {
    return CompressedReg{Pattern::Scalar, lanes[0], 0, 0, 0};
  }
  if (auto c = stride_candidate(lanes)) return c;
  for (int log2 = 1; log2 <= kMaxGroupLog2; ++log2) {
    if (auto c = two_delta_candidate(lanes, log2)) return c;
  }
  return std::nullopt;
}

RegisterEntry decompress(const CompressedReg& c) {
  c.validate();
  RegisterEntry e;
  for (int k = 0; k < kLanes; ++k) e.lanes[static_cast<std::size_t>(k)] = lane_value(c, k);
  return e;
}

bool block_matches_pattern_prefix(std::span<const std::uint32_t, kLanesPerBlock> lanes) {
  // Scalar is Stride with delta 0; group lengths 16 and 32 look like Stride
  // within a single block.
  if (stride_candidate(lanes)) return true;
  for (int log2 = 1; log2 <= 3; ++log2) {
    if (two_delta_candidate(lanes, log2)) return true;
  }
  return false;
}

CompressorStream::Step CompressorStream::push(int block_index, std::span<const std::uint32_t, kLanesPerBlock> lanes) {
  if (block_index != next_) {
    throw ProtocolError("compressor expected block " + std::to_string(next_) + ", got " +
                        std::to_string(block_index));
  }
  std::copy(lanes.begin(), lanes.end(), staged_.lanes.begin() + block_index * kLanesPerBlock);
  ++next_;
  Step step;
  if (block_index == 0) {
    speculation_ = block_matches_pattern_prefix(lanes);
    step.speculation = speculation_;
  }
  if (block_index == 3) {
    compressed_ = try_compress(staged_);
    step.verdict = compressed_.has_value();
  }
  return step;
}

void CompressorStream::reset() {
  staged_ = RegisterEntry{};
  next_ = 0;
  speculation_ = false;
  compressed_.reset();
}

DecompressorStream::DecompressorStream(const CompressedReg& c) : reg_(c) { reg_.validate(); }

Block DecompressorStream::next() {
  if (done()) throw ProtocolError("decompressor already emitted all four blocks");
  Block b;
  for (int k = 0; k < kLanesPerBlock; ++k) {
    b[static_cast<std::size_t>(k)] = lane_value(reg_, next_ * kLanesPerBlock + k);
  }
  ++next_;
  return b;
}

}  // namespace rrcd
