#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace rrcd {

inline constexpr int kLanes = 64;
inline constexpr int kLanesPerBlock = 16;
inline constexpr int kBlockBytes = 64;
inline constexpr int kEntryBytes = 256;

/// One 64-byte block: 16 lanes of 32 bits.
using Block = std::array<std::uint32_t, kLanesPerBlock>;

/// A 256-byte vector register value: 64 lanes of 32 bits, streamed as four blocks.
/// The byte image is the lanes in order, each little-endian.
struct RegisterEntry {
  std::array<std::uint32_t, kLanes> lanes{};

  std::span<const std::uint32_t, kLanesPerBlock> block(int i) const;
  Block block_copy(int i) const;
  void set_block(int i, const Block& b);

  std::array<std::uint8_t, kEntryBytes> to_bytes() const;
  static RegisterEntry from_bytes(std::span<const std::uint8_t, kEntryBytes> bytes);

  /// 512 lowercase hex digits of the byte image.
  std::string to_hex() const;
  /// Throws ConfigError on wrong length or non-hex characters.
  static RegisterEntry from_hex(std::string_view hex);

  friend bool operator==(const RegisterEntry&, const RegisterEntry&) = default;
};

enum class Pattern : std::uint8_t { Scalar = 0, Stride = 1, TwoDelta = 2 };
std::string_view to_string(Pattern p);

inline constexpr std::size_t kCompressedBytes = 8;
inline constexpr int kMaxGroupLog2 = 5;

/// Compressed form of a regular register.
///
///   Scalar:   lane[k] = base
///   Stride:   lane[k] = base + k * delta1
///   TwoDelta: lane[k] = base + (k mod g) * delta1 + (k / g) * delta2,  g = 2^group_log2
///
/// All arithmetic is modulo 2^32. Deltas are 8-bit signed; group_log2 is 1..5.
/// Serialized layout (little-endian 64-bit word, 55 bits used):
///   [1:0] tag, [33:2] base, [41:34] delta1, [49:42] delta2, [54:50] group_log2.
struct CompressedReg {
  Pattern pattern = Pattern::Scalar;
  std::uint32_t base = 0;
  std::int8_t delta1 = 0;
  std::int8_t delta2 = 0;
  std::uint8_t group_log2 = 0;

  int group_len() const { return 1 << group_log2; }

  /// Throws DecodeError if the tag or group length is not representable.
  void validate() const;

  std::array<std::uint8_t, kCompressedBytes> serialize() const;
  static CompressedReg deserialize(std::span<const std::uint8_t, kCompressedBytes> bytes);

  /// Slice storage form: the serialized bytes in lanes 0-1, remaining lanes zero.
  Block to_block() const;
  static CompressedReg from_block(const Block& b);

  friend bool operator==(const CompressedReg&, const CompressedReg&) = default;
};

/// First matching pattern in order Scalar, Stride, TwoDelta (smallest group
/// length first); nullopt when the entry is incompressible.
std::optional<CompressedReg> try_compress(const RegisterEntry& entry);

RegisterEntry decompress(const CompressedReg& c);

/// True when the 16 lanes of a single block match the prefix of some pattern.
bool block_matches_pattern_prefix(std::span<const std::uint32_t, kLanesPerBlock> lanes);

/// Streaming model of the compression unit. Blocks arrive one per cycle in
/// order 0..3; after block 0 it reports the speculative compressibility bit,
/// after block 3 the definitive verdict.
class CompressorStream {
 public:
  struct Step {
    std::optional<bool> speculation;
    std::optional<bool> verdict;
  };

  /// Throws ProtocolError if block_index is not the next expected block.
  Step push(int block_index, std::span<const std::uint32_t, kLanesPerBlock> lanes);

  bool complete() const { return next_ == 4; }
  bool speculation() const { return speculation_; }
  bool mispeculated() const { return complete() && speculation_ && !compressed_; }
  const std::optional<CompressedReg>& result() const { return compressed_; }
  const RegisterEntry& staged() const { return staged_; }
  void reset();

 private:
  RegisterEntry staged_;
  int next_ = 0;
  bool speculation_ = false;
  std::optional<CompressedReg> compressed_;
};

/// Streaming model of a decompression unit: emits one uncompressed block per step.
class DecompressorStream {
 public:
  explicit DecompressorStream(const CompressedReg& c);

  bool done() const { return next_ == 4; }
  /// Throws ProtocolError once all four blocks have been emitted.
  Block next();

 private:
  CompressedReg reg_;
  int next_ = 0;
};

}  // namespace rrcd
