#include "rrcd/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "rrcd/errors.hpp"
#include "rrcd/report_io.hpp"
#include "rrcd/sweep.hpp"
#include "rrcd/trace.hpp"
#include "rrcd/tracegen.hpp"

namespace rrcd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<fs::path> config_dir() {
  const char* dir = std::getenv(kConfigDirEnv);
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return fs::path(dir);
}

// A path that does not exist as given is looked up in the config directory.
std::string resolve_config(const std::string& path) {
  if (fs::exists(path)) return path;
  if (auto dir = config_dir(); dir && fs::path(path).is_relative() && fs::exists(*dir / path)) {
    return (*dir / path).string();
  }
  throw ConfigError("config file '" + path + "' not found" +
                    (config_dir() ? " (also searched " + config_dir()->string() + ")" : std::string()));
}

EnergyConstants energy_constants(const std::string& path) {
  if (!path.empty()) return load_energy_constants(resolve_config(path));
  if (auto dir = config_dir(); dir && fs::exists(*dir / "energy.json")) {
    return load_energy_constants((*dir / "energy.json").string());
  }
  return EnergyConstants{};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

std::array<double, 4> parse_mix(const std::string& text) {
  std::array<double, 4> mix{};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("mix item '" + item + "' is not name=probability");
    const std::string name = item.substr(0, eq);
    double p = 0.0;
    try {
      p = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("mix item '" + item + "' has no numeric probability");
    }
    if (name == "scalar") {
      mix[0] = p;
    } else if (name == "stride") {
      mix[1] = p;
    } else if (name == "twodelta") {
      mix[2] = p;
    } else if (name == "raw") {
      mix[3] = p;
    } else {
      throw ConfigError("unknown pattern '" + name + "' in mix");
    }
  }
  return mix;
}

TraceProfile load_profile(const std::string& path) {
  const std::string resolved = resolve_config(path);
  std::ifstream in(resolved);
  if (!in) throw ConfigError("cannot open profile '" + resolved + "'");
  TraceProfile p;
  try {
    const json j = json::parse(in);
    for (const auto& [k, v] : j.items()) {
      if (k == "wavefronts") {
        p.wavefronts = v.get<int>();
      } else if (k == "window") {
        p.window = v.get<int>();
      } else if (k == "instructions_per_wavefront") {
        p.instructions_per_wavefront = v.get<int>();
      } else if (k == "mix") {
        p.mix = {v.value("scalar", 0.0), v.value("stride", 0.0), v.value("twodelta", 0.0), v.value("raw", 0.0)};
      } else if (k == "state_change_prob") {
        p.state_change_prob = v.get<double>();
      } else if (k == "raw_regular_block0_prob") {
        p.raw_regular_block0_prob = v.get<double>();
      } else if (k == "sources_per_instruction") {
        p.sources_per_instruction = v.get<int>();
      } else if (k == "seed") {
        p.seed = v.get<std::uint64_t>();
      } else {
        throw ConfigError("unknown profile key '" + k + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(resolved + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(resolved + ": " + e.what());
  }
  return p;
}

struct ProfileArgs {
  std::string profile;
  std::optional<int> wavefronts, window, instructions, sources;
  std::string mix;
  std::optional<double> state_change, raw_regular_block0;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--profile", profile, "Trace profile JSON (looked up in $" + std::string(kConfigDirEnv) + ")");
    app->add_option("--wavefronts", wavefronts, "Number of wavefronts");
    app->add_option("--window", window, "Registers per wavefront");
    app->add_option("--instructions", instructions, "Instructions per wavefront");
    app->add_option("--mix", mix, "Pattern mix, e.g. scalar=0.2,stride=0.2,twodelta=0.2,raw=0.4");
    app->add_option("--state-change", state_change, "Probability that a rewrite changes compressibility");
    app->add_option("--raw-regular-block0", raw_regular_block0,
                    "Share of raw values whose first block fits a pattern");
    app->add_option("--sources", sources, "Source operands per instruction (0-2)");
    app->add_option("--trace-seed", seed, "Trace generator seed");
  }

  TraceProfile build() const {
    TraceProfile p = profile.empty() ? TraceProfile{} : load_profile(profile);
    if (wavefronts) p.wavefronts = *wavefronts;
    if (window) p.window = *window;
    if (instructions) p.instructions_per_wavefront = *instructions;
    if (sources) p.sources_per_instruction = *sources;
    if (!mix.empty()) p.mix = parse_mix(mix);
    if (state_change) p.state_change_prob = *state_change;
    if (raw_regular_block0) p.raw_regular_block0_prob = *raw_regular_block0;
    if (seed) p.seed = *seed;
    return p;
  }
};

json stats_json(const TraceGenStats& s) {
  return {{"dest_writes", s.dest_writes},
          {"realized_mix",
           {{"scalar", s.realized_fraction(ValueKind::Scalar)},
            {"stride", s.realized_fraction(ValueKind::Stride)},
            {"twodelta", s.realized_fraction(ValueKind::TwoDelta)},
            {"raw", s.realized_fraction(ValueKind::Raw)}}},
          {"compressible_fraction", s.compressible_fraction()},
          {"compression_ratio", s.compression_ratio()},
          {"state_changes", s.state_changes},
          {"regular_block0_raw", s.regular_block0_raw}};
}

struct RunArgs {
  int max_wavefronts = 16;
  std::size_t lds_bytes = SpillPartition::kDefaultLdsBytes;
  int lds_latency = 1;
  int extra_slice_latency = 0;
  bool debug_invariants = false;
  std::string energy;

  void attach(CLI::App* app) {
    app->add_option("--max-wavefronts", max_wavefronts, "Resident wavefront limit")->capture_default_str();
    app->add_option("--lds-bytes", lds_bytes, "LDS size; the upper half backs spills")->capture_default_str();
    app->add_option("--lds-latency", lds_latency, "Cycles per 64-byte LDS beat")->capture_default_str();
    app->add_option("--extra-slice-latency", extra_slice_latency, "Additional RRCD pipeline stages")
        ->capture_default_str();
    app->add_flag("--debug-invariants", debug_invariants, "Check bitmap/TR invariants every changed cycle");
    app->add_option("--energy", energy, "Energy constants JSON (default: $" + std::string(kConfigDirEnv) +
                                            "/energy.json, else built-in table)");
  }

  RunConfig build() const {
    RunConfig c;
    c.max_wavefronts = max_wavefronts;
    c.lds_bytes = lds_bytes;
    c.lds_latency = lds_latency;
    c.extra_slice_latency = extra_slice_latency;
    c.debug_invariants = debug_invariants;
    return c;
  }
};

int cmd_genmap(const std::string& scenario_name, std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  const auto kind = parse_scenario(scenario_name);
  const auto sc = scenario(kind);
  FaultMapFile file{generate_fault_map(sc, seed), kind, sc.vdd_mv, seed};
  save_fault_map(out_path, file);
  const auto stats = fault_stats(file.map);
  out << json{{"map", out_path},
              {"scenario", std::string(to_string(kind))},
              {"seed", seed},
              {"faulty_fraction", stats.faulty_fraction},
              {"faulty_blocks", file.map.total_faulty_blocks()},
              {"bit_class_counts", stats.bit_class_counts}}
             .dump()
      << '\n';
  return 0;
}

struct SimArgs {
  std::string mode = "rrcd";
  std::string scenario;
  std::string trace;
  std::string map;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::optional<std::uint64_t> dump_tr;
  bool timeline = false;
  RunArgs run;
};

int cmd_sim(const SimArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig rc = a.run.build();
  rc.mode = parse_mode(a.mode);
  rc.seed = a.seed;
  rc.scenario = ScenarioKind::Comun;
  if (!a.map.empty()) {
    const auto file = load_fault_map(a.map);
    rc.fault_map = file.map;
    rc.scenario = file.scenario;
  }
  if (!a.scenario.empty()) rc.scenario = parse_scenario(a.scenario);
  rc.dump_tr_cycle = a.dump_tr;
  rc.record_timeline = a.timeline;
  const EnergyConstants constants = energy_constants(a.run.energy);
  const Trace trace = load_trace(a.trace);
  const SimReport report = run(trace, rc);
  const EnergyReport energy = finalize(report.ledger, constants, rc.mode, rc.scenario);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_text(dir / "report.json", report_to_json(report).dump(2) + "\n");
  write_text(dir / "report.csv", report_csv(report));
  write_text(dir / "energy.json", energy_to_json(energy).dump(2) + "\n");
  write_text(dir / "energy.csv", energy_csv(energy));
  {
    std::ostringstream fs_text;
    write_final_state(fs_text, report);
    write_text(dir / "final_state.txt", fs_text.str());
  }
  if (a.dump_tr) write_text(dir / "tr_dump.csv", report.tr_dump);
  if (a.timeline) {
    std::ostringstream t;
    t << "trace_index,wf,issue_cycle,retire_cycle\n";
    for (const auto& e : report.timeline) t << e.trace_index << ',' << e.wf << ',' << e.issue_cycle << ',' << e.retire_cycle << '\n';
    write_text(dir / "timeline.csv", t.str());
  }
  for (const auto& w : energy.warnings) err << json{{"warning", w}}.dump() << '\n';
  out << json{{"out", dir.string()},
              {"mode", std::string(to_string(rc.mode))},
              {"scenario", std::string(to_string(rc.scenario))},
              {"cycles", report.cycles},
              {"instructions", report.instructions},
              {"total_energy_pj", energy.total_pj()},
              {"integrity_violations", report.integrity_violations},
              {"invariant_violations", report.invariant_violations},
              {"config_hash", hex64(report.config_hash)}}
             .dump()
      << '\n';
  if (report.integrity_violations != 0 || report.invariant_violations != 0 || report.faulty_block_writes != 0) {
    err << json{{"error",
                 {{"kind", "integrity"},
                  {"message", "run finished with integrity or invariant violations"},
                  {"first_invariant_violation", report.first_invariant_violation}}}}
               .dump()
        << '\n';
    return 1;
  }
  return 0;
}

struct SweepArgs {
  std::string trace;
  ProfileArgs profile;
  std::vector<std::string> scenarios{"comun", "agrupado", "disperso"};
  std::vector<std::uint64_t> seeds{1};
  int jobs = 1;
  std::string out_path;
  RunArgs run;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  SweepConfig sc;
  sc.base = a.run.build();
  sc.constants = energy_constants(a.run.energy);
  sc.scenarios.clear();
  for (const auto& s : a.scenarios) sc.scenarios.push_back(parse_scenario(s));
  sc.seeds = a.seeds;
  sc.jobs = a.jobs;
  const Trace trace = a.trace.empty() ? generate_trace(a.profile.build()).trace : load_trace(a.trace);
  const auto rows = run_sweep(trace, sc);
  std::ofstream csv(a.out_path);
  if (!csv) throw ConfigError("cannot write '" + a.out_path + "'");
  write_sweep_csv(csv, rows);
  std::uint64_t mismatches = 0, violations = 0;
  for (const auto& r : rows) {
    mismatches += r.state_mismatches + r.rrcd.integrity_violations;
    violations += r.rrcd.invariant_violations;
  }
  out << json{{"out", a.out_path}, {"rows", rows.size()}, {"state_mismatches", mismatches}, {"invariant_violations", violations}}
             .dump()
      << '\n';
  return 0;
}

struct ProbeArgs {
  std::string hex;
  std::string lanes;
  std::string value;
};

int cmd_probe(const ProbeArgs& a, std::ostream& out) {
  const int given = !a.hex.empty() + !a.lanes.empty() + !a.value.empty();
  if (given != 1) throw ConfigError("compress-probe needs exactly one of --hex, --lanes, --value");
  RegisterEntry e;
  if (!a.hex.empty()) {
    e = RegisterEntry::from_hex(a.hex);
  } else if (!a.value.empty()) {
    try {
      e = value_from_json(json::parse(a.value));
    } catch (const json::exception& ex) {
      throw ConfigError(std::string("--value: ") + ex.what());
    }
  } else {
    std::vector<std::uint32_t> v;
    std::stringstream ss(a.lanes);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        v.push_back(static_cast<std::uint32_t>(std::stoull(item, nullptr, 0)));
      } catch (const std::exception&) {
        throw ConfigError("--lanes item '" + item + "' is not an integer");
      }
    }
    if (v.size() != 1 && v.size() != static_cast<std::size_t>(kLanes)) {
      throw ConfigError("--lanes needs 1 or 64 values, got " + std::to_string(v.size()));
    }
    for (std::size_t k = 0; k < e.lanes.size(); ++k) e.lanes[k] = v.size() == 1 ? v[0] : v[k];
  }
  const auto c = try_compress(e);
  json j = {{"compressible", c.has_value()}, {"speculation", block_matches_pattern_prefix(e.block(0))}, {"value", value_to_json(e)}};
  if (c) {
    std::string bytes;
    for (auto b : c->serialize()) {
      static constexpr char kDigits[] = "0123456789abcdef";
      bytes.push_back(kDigits[b >> 4]);
      bytes.push_back(kDigits[b & 0xF]);
    }
    j["serialized"] = bytes;
  }
  out << j.dump() << '\n';
  return 0;
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cycle-level simulator of a GPU register-file slice with compression and fault redirection"};
  app.require_subcommand(1);

  std::string gm_scenario;
  std::uint64_t gm_seed = 1;
  std::string gm_out;
  auto* genmap = app.add_subcommand("genmap", "Generate a fault map for a reliability scenario");
  genmap->add_option("--scenario", gm_scenario, "comun, agrupado, disperso, conventional or smoothing")->required();
  genmap->add_option("--seed", gm_seed, "RNG seed")->capture_default_str();
  genmap->add_option("--out", gm_out, "Output map file")->required();

  ProfileArgs gt;
  std::string gt_out;
  auto* gentrace = app.add_subcommand("gentrace", "Generate a synthetic JSONL trace");
  gt.attach(gentrace);
  gentrace->add_option("--out", gt_out, "Output trace file")->required();

  SimArgs sim_args;
  auto* sim = app.add_subcommand("sim", "Simulate one trace");
  sim->add_option("--mode", sim_args.mode, "conv, suav or rrcd")->capture_default_str();
  sim->add_option("--scenario", sim_args.scenario, "Reliability scenario (default: map header, else comun)");
  sim->add_option("--trace", sim_args.trace, "JSONL trace")->required();
  sim->add_option("--map", sim_args.map, "Fault map file (default: generated from scenario and seed)");
  sim->add_option("--seed", sim_args.seed, "Fault-map seed")->capture_default_str();
  sim->add_option("--out", sim_args.out_dir, "Output directory")->required();
  sim->add_option("--dump-tr", sim_args.dump_tr, "Write the redirection table as of this cycle to tr_dump.csv");
  sim->add_flag("--timeline", sim_args.timeline, "Write per-instruction issue/retire cycles to timeline.csv");
  sim_args.run.attach(sim);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Run Conv and RRCD over a scenario x seed matrix");
  sweep->add_option("--trace", sw.trace, "JSONL trace (default: generate from the profile options)");
  sw.profile.attach(sweep);
  sweep->add_option("--scenarios", sw.scenarios, "Scenarios")->delimiter(',')->capture_default_str();
  sweep->add_option("--seeds", sw.seeds, "Fault-map seeds")->delimiter(',')->capture_default_str();
  sweep->add_option("--jobs", sw.jobs, "Concurrent runs")->capture_default_str();
  sweep->add_option("--out", sw.out_path, "Output CSV")->required();
  sw.run.attach(sweep);

  ProbeArgs probe_args;
  auto* probe = app.add_subcommand("compress-probe", "Report how one register value compresses");
  probe->add_option("--hex", probe_args.hex, "512 hex digits (little-endian lanes)");
  probe->add_option("--lanes", probe_args.lanes, "1 or 64 comma-separated lane values");
  probe->add_option("--value", probe_args.value, "Trace-style JSON value");

  std::string area_energy;
  auto* area = app.add_subcommand("area", "Report area overhead of the redirection hardware");
  area->add_option("--energy", area_energy, "Energy constants JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    print_error(err, "usage", e.what());
    return 64;
  }

  try {
    if (genmap->parsed()) return cmd_genmap(gm_scenario, gm_seed, gm_out, out);
    if (gentrace->parsed()) {
      const auto g = generate_trace(gt.build());
      save_trace(gt_out, g.trace);
      json j = stats_json(g.stats);
      j["out"] = gt_out;
      out << j.dump() << '\n';
      return 0;
    }
    if (sim->parsed()) return cmd_sim(sim_args, out, err);
    if (sweep->parsed()) return cmd_sweep(sw, out);
    if (probe->parsed()) return cmd_probe(probe_args, out);
    if (area->parsed()) {
      out << area_to_json(area_report(energy_constants(area_energy))).dump() << '\n';
      return 0;
    }
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what());
    return 2;
  } catch (const fs::filesystem_error& e) {
    print_error(err, "io", e.what());
    return 2;
  }
  return 0;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace rrcd
