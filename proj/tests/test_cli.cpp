#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <unistd.h>

#include "rrcd/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = rrcd::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("rrcd_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

class ConfigDirEnv {
 public:
  explicit ConfigDirEnv(const std::string& dir) { ::setenv(rrcd::kConfigDirEnv, dir.c_str(), 1); }
  ~ConfigDirEnv() { ::unsetenv(rrcd::kConfigDirEnv); }
};

json error_json(const Result& r) {
  const auto line = r.err.substr(0, r.err.find('\n'));
  return json::parse(line);
}

const std::vector<std::string> kSmallTrace{"--wavefronts", "4", "--instructions", "40", "--state-change", "0.2",
                                           "--raw-regular-block0", "0.1"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("genmap writes a loadable map") {
  TempDir tmp;
  const auto r = cli({"genmap", "--scenario", "disperso", "--seed", "7", "--out", tmp / "d.map"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j.at("scenario") == "disperso");
  CHECK(j.at("faulty_blocks").get<int>() > 0);
  CHECK(fs::exists(tmp / "d.map"));
  const auto again = cli({"genmap", "--scenario", "disperso", "--seed", "7", "--out", tmp / "e.map"});
  CHECK(slurp(tmp / "d.map") == slurp(tmp / "e.map"));
}

TEST_CASE("conv and rrcd agree on the final state") {
  TempDir tmp;
  REQUIRE(cli(concat({"gentrace", "--out", tmp / "t.jsonl"}, kSmallTrace)).code == 0);
  REQUIRE(cli({"genmap", "--scenario", "agrupado", "--seed", "3", "--out", tmp / "a.map"}).code == 0);
  const auto conv = cli({"sim", "--mode", "conv", "--trace", tmp / "t.jsonl", "--out", tmp / "conv"});
  REQUIRE(conv.code == 0);
  const auto rrcd = cli({"sim", "--mode", "rrcd", "--trace", tmp / "t.jsonl", "--map", tmp / "a.map", "--out",
                         tmp / "rrcd", "--debug-invariants", "--timeline"});
  REQUIRE(rrcd.code == 0);
  const auto state = slurp(tmp / "conv/final_state.txt");
  CHECK_FALSE(state.empty());
  CHECK(state == slurp(tmp / "rrcd/final_state.txt"));
  const auto summary = json::parse(rrcd.out);
  CHECK(summary.at("scenario") == "agrupado");
  CHECK(summary.at("invariant_violations") == 0);
  const auto report = json::parse(slurp(tmp / "rrcd/report.json"));
  CHECK(report.at("instructions") == 160);
  for (const char* f : {"report.csv", "energy.json", "energy.csv", "timeline.csv"}) {
    CHECK(fs::exists(tmp / (std::string("rrcd/") + f)));
  }
  CHECK(slurp(tmp / "rrcd/energy.csv").rfind("category,pj\n", 0) == 0);
}

TEST_CASE("suav mode runs") {
  TempDir tmp;
  REQUIRE(cli(concat({"gentrace", "--out", tmp / "t.jsonl"}, kSmallTrace)).code == 0);
  const auto r = cli({"sim", "--mode", "suav", "--trace", tmp / "t.jsonl", "--out", tmp / "s"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("mode") == "suav");
}

TEST_CASE("sweep over three scenarios") {
  TempDir tmp;
  const auto r = cli(concat({"sweep", "--out", tmp / "s.csv", "--jobs", "2"}, kSmallTrace));
  REQUIRE(r.code == 0);
  std::istringstream csv(slurp(tmp / "s.csv"));
  std::string header, line;
  std::getline(csv, header);
  CHECK(header.find("faulty_fraction") != std::string::npos);
  CHECK(header.find("slowdown") != std::string::npos);
  CHECK(header.find("normalized_energy") != std::string::npos);
  std::vector<std::string> rows;
  while (std::getline(csv, line)) rows.push_back(line);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].rfind("comun,", 0) == 0);
  CHECK(rows[1].rfind("agrupado,", 0) == 0);
  CHECK(rows[2].rfind("disperso,", 0) == 0);
  CHECK(json::parse(r.out).at("state_mismatches") == 0);
}

TEST_CASE("empty trace simulates zero instructions") {
  TempDir tmp;
  { std::ofstream(tmp / "empty.jsonl"); }
  const auto r = cli({"sim", "--trace", tmp / "empty.jsonl", "--out", tmp / "o"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("instructions") == 0);
  CHECK(json::parse(r.out).at("cycles") == 0);
}

TEST_CASE("errors are machine readable") {
  TempDir tmp;
  const auto missing = cli({"sim", "--trace", tmp / "nope.jsonl", "--out", tmp / "o"});
  CHECK(missing.code == 2);
  CHECK(error_json(missing).at("error").at("kind") == "config");

  const auto usage = cli({"sim", "--bogus"});
  CHECK(usage.code == 64);
  CHECK(error_json(usage).at("error").at("kind") == "usage");

  CHECK(cli({}).code == 64);
  const auto mode = cli({"genmap", "--scenario", "nowhere", "--out", tmp / "x.map"});
  CHECK(mode.code == 2);
  CHECK(error_json(mode).at("error").at("message").get<std::string>().find("nowhere") != std::string::npos);

  { std::ofstream(tmp / "bad.jsonl") << "{\"wf\":0,\"start\":4}\n{\"wf\":0,\"src\":[0]}\n"; }
  const auto rbw = cli({"sim", "--trace", tmp / "bad.jsonl", "--out", tmp / "o"});
  CHECK(rbw.code == 2);
  CHECK(error_json(rbw).at("error").at("kind") == "simulation");

  const auto overflow = cli({"gentrace", "--wavefronts", "32", "--out", tmp / "t.jsonl"});
  CHECK(overflow.code == 2);
  CHECK(error_json(overflow).at("error").at("message").get<std::string>().find("window overflow") !=
        std::string::npos);
}

TEST_CASE("help exits cleanly") {
  const auto r = cli({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("compress-probe") != std::string::npos);
}

TEST_CASE("config directory supplies profiles and energy constants") {
  TempDir cfg;
  TempDir work;
  { std::ofstream(cfg / "tiny.json") << R"({"wavefronts":2,"instructions_per_wavefront":10,"seed":4})"; }
  { std::ofstream(cfg / "energy.json") << R"({"lds_access_pj":1.0,"slice":{"comun":{"static_mw":0}}})"; }
  ConfigDirEnv env(cfg / "");
  const auto g = cli({"gentrace", "--profile", "tiny.json", "--out", work / "t.jsonl"});
  REQUIRE(g.code == 0);
  CHECK(json::parse(g.out).at("dest_writes") == 20);

  const auto area = cli({"area"});
  REQUIRE(area.code == 0);

  const auto sim = cli({"sim", "--trace", work / "t.jsonl", "--out", work / "o"});
  REQUIRE(sim.code == 0);
  const auto energy = json::parse(slurp(work / "o/energy.json"));
  CHECK(energy.at("Static") == 0.0);

  { std::ofstream(cfg / "broken.json") << R"({"wavefronts":2,"colour":1})"; }
  const auto bad = cli({"gentrace", "--profile", "broken.json", "--out", work / "u.jsonl"});
  CHECK(bad.code == 2);
  CHECK(error_json(bad).at("error").at("message").get<std::string>().find("colour") != std::string::npos);
}

TEST_CASE("compress-probe") {
  const auto s = cli({"compress-probe", "--lanes", "42"});
  REQUIRE(s.code == 0);
  const auto j = json::parse(s.out);
  CHECK(j.at("compressible") == true);
  CHECK(j.at("value").at("pattern") == "scalar");
  CHECK(j.at("serialized").get<std::string>().size() == 16);

  const auto v = cli({"compress-probe", "--value", R"({"pattern":"twodelta","params":{"base":1,"delta1":2,"delta2":-3,"group_len":8}})"});
  REQUIRE(v.code == 0);
  CHECK(json::parse(v.out).at("value").at("params").at("group_len") == 8);
  CHECK(json::parse(v.out).at("speculation") == true);

  std::string hex(512, '0');
  hex[511] = '1';
  const auto h = cli({"compress-probe", "--hex", hex});
  REQUIRE(h.code == 0);
  CHECK(json::parse(h.out).at("compressible") == false);
  CHECK_FALSE(json::parse(h.out).contains("serialized"));

  CHECK(cli({"compress-probe"}).code == 2);
  CHECK(cli({"compress-probe", "--lanes", "1,2"}).code == 2);
  CHECK(cli({"compress-probe", "--lanes", "1", "--hex", hex}).code == 2);
}

TEST_CASE("redirection table dump") {
  TempDir tmp;
  REQUIRE(cli(concat({"gentrace", "--out", tmp / "t.jsonl"}, kSmallTrace)).code == 0);
  REQUIRE(cli({"sim", "--trace", tmp / "t.jsonl", "--out", tmp / "o", "--dump-tr", "100"}).code == 0);
  const auto dump = slurp(tmp / "o/tr_dump.csv");
  CHECK(dump.rfind("phys_reg,v,c,m,entry,block\n", 0) == 0);
  CHECK(std::count(dump.begin(), dump.end(), '\n') > 1);
}
