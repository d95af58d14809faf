#include "rrcd/faultmap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rrcd/errors.hpp"

namespace rrcd {

namespace {

void check_entry(int entry) {
  if (entry < 0 || entry >= kSliceEntries) {
    throw ConfigError("fault map entry out of range: " + std::to_string(entry));
  }
}

void check_block(int block) {
  if (block < 0 || block >= kBlocksPerEntry) {
    throw ConfigError("fault map block out of range: " + std::to_string(block));
  }
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Uniform double in [0, 1) from the top 53 bits.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Comun: return "comun";
    case ScenarioKind::Agrupado: return "agrupado";
    case ScenarioKind::Disperso: return "disperso";
    case ScenarioKind::Conventional: return "conventional";
    case ScenarioKind::Smoothing: return "smoothing";
  }
  return "?";
}

ScenarioKind parse_scenario(std::string_view name) {
  const std::string n = lowercase(name);
  if (n == "comun" || n == "común") return ScenarioKind::Comun;
  if (n == "agrupado") return ScenarioKind::Agrupado;
  if (n == "disperso") return ScenarioKind::Disperso;
  if (n == "conventional" || n == "conv") return ScenarioKind::Conventional;
  if (n == "smoothing" || n == "suav") return ScenarioKind::Smoothing;
  throw ConfigError("unknown reliability scenario '" + std::string(name) + "'");
}

std::string_view to_string(EntryClass c) {
  switch (c) {
    case EntryClass::Reliable: return "reliable";
    case EntryClass::Faulty2: return "faulty2";
    case EntryClass::Faulty3: return "faulty3";
    case EntryClass::Dead: return "dead";
  }
  return "?";
}

void ReliabilityScenario::validate() const {
  double sum = 0.0;
  for (double p : class_distribution) {
    if (!(p >= 0.0)) throw ConfigError("negative or NaN probability in class distribution");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "class distribution of scenario '" << to_string(kind) << "' sums to " << sum
       << ", expected 1";
    throw ConfigError(os.str());
  }
}

ReliabilityScenario scenario(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Comun: return {kind, 419, {0.34, 0.33, 0.20, 0.10, 0.03}};
    case ScenarioKind::Agrupado: return {kind, 497, {0.43, 0.20, 0.12, 0.10, 0.15}};
    case ScenarioKind::Disperso: return {kind, 371, {0.26, 0.35, 0.23, 0.12, 0.04}};
    case ScenarioKind::Conventional: return {kind, std::nullopt, {1.0, 0.0, 0.0, 0.0, 0.0}};
    case ScenarioKind::Smoothing: return {kind, 600, {1.0, 0.0, 0.0, 0.0, 0.0}};
  }
  throw ConfigError("unknown scenario kind");
}

bool FaultMap::is_faulty(int entry, int block) const {
  check_entry(entry);
  check_block(block);
  return blocks_.test(static_cast<std::size_t>(entry * kBlocksPerEntry + block));
}

int FaultMap::faulty_blocks(int entry) const { return static_cast<int>(entry_blocks(entry).count()); }

std::bitset<4> FaultMap::entry_blocks(int entry) const {
  check_entry(entry);
  std::bitset<4> out;
  for (int b = 0; b < kBlocksPerEntry; ++b) {
    out[static_cast<std::size_t>(b)] = blocks_.test(static_cast<std::size_t>(entry * kBlocksPerEntry + b));
  }
  return out;
}

EntryClass FaultMap::entry_class(int entry) const {
  switch (faulty_blocks(entry)) {
    case 0: return EntryClass::Reliable;
    case 2: return EntryClass::Faulty2;
    case 3: return EntryClass::Faulty3;
    default: return EntryClass::Dead;
  }
}

void FaultMap::set_entry(int entry, std::bitset<4> faulty) {
  check_entry(entry);
  if (faulty.count() == 1) {
    throw ConfigError("entry " + std::to_string(entry) +
                      " has a single faulty block; single-bit faults are repaired");
  }
  for (int b = 0; b < kBlocksPerEntry; ++b) {
    blocks_.set(static_cast<std::size_t>(entry * kBlocksPerEntry + b), faulty[static_cast<std::size_t>(b)]);
  }
  if (faulty.any()) ecp_repaired_.reset(static_cast<std::size_t>(entry));
}

void FaultMap::set_ecp_repaired(int entry, bool repaired) {
  check_entry(entry);
  if (repaired && has_fault(entry)) {
    throw ConfigError("entry " + std::to_string(entry) + " cannot be both repaired and faulty");
  }
  ecp_repaired_.set(static_cast<std::size_t>(entry), repaired);
}

bool FaultMap::ecp_repaired(int entry) const {
  check_entry(entry);
  return ecp_repaired_.test(static_cast<std::size_t>(entry));
}

int FaultMap::bit_class(int entry) const {
  const int n = faulty_blocks(entry);
  if (n > 0) return n;
  return ecp_repaired(entry) ? 1 : 0;
}

FaultMap generate_fault_map(const ReliabilityScenario& sc, std::uint64_t seed) {
  sc.validate();
  std::mt19937_64 rng(seed);
  FaultMap map;
  for (int e = 0; e < kSliceEntries; ++e) {
    const double u = unit_draw(rng);
    int bits = 4;
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
      acc += sc.class_distribution[static_cast<std::size_t>(i)];
      if (u < acc) {
        bits = i;
        break;
      }
    }
    if (bits == 1) {
      map.set_ecp_repaired(e, true);
      continue;
    }
    if (bits == 0) continue;
    // Partial Fisher-Yates: pick `bits` distinct blocks uniformly.
    std::array<int, 4> order{0, 1, 2, 3};
    std::bitset<4> faulty;
    for (int k = 0; k < bits; ++k) {
      const auto span = static_cast<std::uint64_t>(4 - k);
      const auto j = static_cast<std::size_t>(k) + static_cast<std::size_t>(rng() % span);
      std::swap(order[static_cast<std::size_t>(k)], order[j]);
      faulty.set(static_cast<std::size_t>(order[static_cast<std::size_t>(k)]));
    }
    map.set_entry(e, faulty);
  }
  return map;
}

FaultStats fault_stats(const FaultMap& map) {
  FaultStats s;
  for (int e = 0; e < kSliceEntries; ++e) {
    ++s.class_counts[static_cast<std::size_t>(map.entry_class(e))];
    ++s.bit_class_counts[static_cast<std::size_t>(map.bit_class(e))];
  }
  const int faulty = s.class_counts[1] + s.class_counts[2] + s.class_counts[3];
  s.faulty_fraction = static_cast<double>(faulty) / kSliceEntries;
  return s;
}

void write_fault_map(std::ostream& os, const FaultMapFile& file) {
  nlohmann::json header;
  header["scenario"] = std::string(to_string(file.scenario));
  header["vdd_mv"] = file.vdd_mv ? nlohmann::json(*file.vdd_mv) : nlohmann::json(nullptr);
  header["seed"] = file.seed;
  auto repaired = nlohmann::json::array();
  for (int e = 0; e < kSliceEntries; ++e) {
    if (file.map.ecp_repaired(e)) repaired.push_back(e);
  }
  header["ecp_repaired"] = repaired;
  os << header.dump() << '\n';
  for (int e = 0; e < kSliceEntries; ++e) {
    for (int b = 0; b < kBlocksPerEntry; ++b) os << (file.map.is_faulty(e, b) ? '1' : '0');
    os << '\n';
  }
}

FaultMapFile read_fault_map(std::istream& is, std::string_view path) {
  auto fail = [&](int line, const std::string& what) -> ConfigError {
    return ConfigError(std::string(path) + ":" + std::to_string(line) + ": " + what);
  };
  FaultMapFile out;
  std::string line;
  if (!std::getline(is, line)) throw fail(1, "missing header");
  try {
    const auto header = nlohmann::json::parse(line);
    out.scenario = parse_scenario(header.at("scenario").get<std::string>());
    if (header.contains("vdd_mv") && !header["vdd_mv"].is_null()) out.vdd_mv = header["vdd_mv"].get<int>();
    out.seed = header.value("seed", std::uint64_t{0});
    if (header.contains("ecp_repaired")) {
      for (const auto& e : header["ecp_repaired"]) out.map.set_ecp_repaired(e.get<int>(), true);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw fail(1, std::string("bad header: ") + ex.what());
  } catch (const ConfigError& ex) {
    throw fail(1, ex.what());
  }
  for (int e = 0; e < kSliceEntries; ++e) {
    const int lineno = e + 2;
    if (!std::getline(is, line)) throw fail(lineno, "expected 256 block rows");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() != kBlocksPerEntry) throw fail(lineno, "row must have 4 digits");
    std::bitset<4> flags;
    for (int b = 0; b < kBlocksPerEntry; ++b) {
      const char c = line[static_cast<std::size_t>(b)];
      if (c != '0' && c != '1') throw fail(lineno, "row must contain only '0' or '1'");
      flags[static_cast<std::size_t>(b)] = c == '1';
    }
    if (flags.any() && out.map.ecp_repaired(e)) out.map.set_ecp_repaired(e, false);
    try {
      out.map.set_entry(e, flags);
    } catch (const ConfigError& ex) {
      throw fail(lineno, ex.what());
    }
  }
  while (std::getline(is, line)) {
    if (!line.empty() && line != "\r") throw fail(kSliceEntries + 2, "trailing content after 256 rows");
  }
  return out;
}

FaultMapFile load_fault_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open fault map '" + path + "'");
  return read_fault_map(in, path);
}

void save_fault_map(const std::string& path, const FaultMapFile& file) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write fault map '" + path + "'");
  write_fault_map(out, file);
}

}  // namespace rrcd
