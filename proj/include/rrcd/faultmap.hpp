#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace rrcd {

inline constexpr int kSliceEntries = 256;
inline constexpr int kBlocksPerEntry = 4;
inline constexpr int kSliceBlocks = kSliceEntries * kBlocksPerEntry;

enum class ScenarioKind : std::uint8_t { Comun, Agrupado, Disperso, Conventional, Smoothing };

std::string_view to_string(ScenarioKind kind);
/// Accepts "comun"/"común", "agrupado", "disperso", "conventional"/"conv",
/// "smoothing"/"suav" (case-insensitive). Throws ConfigError otherwise.
ScenarioKind parse_scenario(std::string_view name);

/// Supply point and per-entry faulty-bit distribution of one reliability scenario.
/// class_distribution[i] is the probability that an entry has i faulty bits
/// (index 4 groups four or more).
struct ReliabilityScenario {
  ScenarioKind kind = ScenarioKind::Conventional;
  std::optional<int> vdd_mv;  // empty: nominal supply
  std::array<double, 5> class_distribution{1.0, 0.0, 0.0, 0.0, 0.0};

  /// Throws ConfigError unless the distribution is non-negative and sums to 1 (1e-9).
  void validate() const;
};

/// Built-in scenario table (sub-Vmin fault distributions at 28 nm).
ReliabilityScenario scenario(ScenarioKind kind);

enum class EntryClass : std::uint8_t { Reliable, Faulty2, Faulty3, Dead };
std::string_view to_string(EntryClass c);

/// 256 x 4 grid of permanently faulty 64-byte blocks for one slice.
///
/// Entries hold 0, 2, 3 or 4 faulty blocks: a single faulty bit is repaired by
/// the per-entry error-correcting pointer, and an entry with i >= 2 faulty bits
/// has i (capped at 4) faulty blocks. Entries whose single bit was repaired are
/// remembered separately so the full 5-bin histogram can be recovered.
class FaultMap {
 public:
  FaultMap() = default;

  bool is_faulty(int entry, int block) const;
  int faulty_blocks(int entry) const;
  EntryClass entry_class(int entry) const;
  bool has_fault(int entry) const { return faulty_blocks(entry) != 0; }

  /// Sets the faulty-block flags of one entry. Throws ConfigError when exactly
  /// one block is flagged (not representable after repair).
  void set_entry(int entry, std::bitset<4> faulty);
  std::bitset<4> entry_blocks(int entry) const;

  void set_ecp_repaired(int entry, bool repaired);
  bool ecp_repaired(int entry) const;

  /// Faulty-bit class of the entry as sampled: 0, 1, 2, 3 or 4 (four or more).
  int bit_class(int entry) const;

  int total_faulty_blocks() const { return static_cast<int>(blocks_.count()); }
  const std::bitset<kSliceBlocks>& blocks() const { return blocks_; }

  friend bool operator==(const FaultMap&, const FaultMap&) = default;

 private:
  std::bitset<kSliceBlocks> blocks_;
  std::bitset<kSliceEntries> ecp_repaired_;
};

/// Samples a fault map. Deterministic for a fixed (scenario, seed).
FaultMap generate_fault_map(const ReliabilityScenario& scenario, std::uint64_t seed);

struct FaultStats {
  std::array<int, 4> class_counts{};      // indexed by EntryClass
  std::array<int, 5> bit_class_counts{};  // 0, 1, 2, 3, >=4 faulty bits
  double faulty_fraction = 0.0;
};

FaultStats fault_stats(const FaultMap& map);

struct FaultMapFile {
  FaultMap map;
  ScenarioKind scenario = ScenarioKind::Conventional;
  std::optional<int> vdd_mv;
  std::uint64_t seed = 0;
};

/// Text format: one JSON header line {scenario, vdd_mv, seed, ecp_repaired}
/// followed by 256 rows of four '0'/'1' block flags (block 0 first).
void write_fault_map(std::ostream& os, const FaultMapFile& file);
FaultMapFile read_fault_map(std::istream& is, std::string_view path = "<stream>");
FaultMapFile load_fault_map(const std::string& path);
void save_fault_map(const std::string& path, const FaultMapFile& file);

}  // namespace rrcd
