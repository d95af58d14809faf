#include <doctest.h>

#include <set>
#include <sstream>

#include "rrcd/errors.hpp"
#include "rrcd/trace.hpp"
#include "rrcd/tracegen.hpp"

using namespace rrcd;
using nlohmann::json;

namespace {

Trace parse(const std::string& text) {
  std::istringstream in(text);
  return read_trace(in, "t.jsonl");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("value JSON uses the canonical pattern") {
  RegisterEntry e;
  e.lanes.fill(5);
  CHECK(value_to_json(e) == json::parse(R"({"pattern":"scalar","params":{"base":5}})"));
  for (std::size_t k = 0; k < e.lanes.size(); ++k) e.lanes[k] = 10u - 2u * static_cast<std::uint32_t>(k);
  CHECK(value_to_json(e) == json::parse(R"({"pattern":"stride","params":{"base":10,"delta":-2}})"));
  for (std::size_t k = 0; k < e.lanes.size(); ++k) {
    e.lanes[k] = 1000u + static_cast<std::uint32_t>(k % 4) * 3u + static_cast<std::uint32_t>(k / 4) * 100u;
  }
  CHECK(value_to_json(e) ==
        json::parse(R"({"pattern":"twodelta","params":{"base":1000,"delta1":3,"delta2":100,"group_len":4}})"));
  e.lanes[63] ^= 0x80000000u;
  const auto j = value_to_json(e);
  CHECK(j.at("pattern") == "raw");
  CHECK(j.at("params").at("hex").get<std::string>().size() == 512);
  CHECK(value_from_json(j) == e);
}

TEST_CASE("value JSON round trip") {
  for (const char* text : {R"({"pattern":"scalar","params":{"base":4294967295}})",
                           R"({"pattern":"stride","params":{"base":0,"delta":127}})",
                           R"({"pattern":"twodelta","params":{"base":7,"delta1":-128,"delta2":1,"group_len":32}})"}) {
    CAPTURE(text);
    const auto v = value_from_json(json::parse(text));
    CHECK(value_from_json(value_to_json(v)) == v);
    CHECK(try_compress(v).has_value());
  }
}

TEST_CASE("value JSON errors") {
  auto bad = [](const char* text) { return value_from_json(json::parse(text)); };
  CHECK_THROWS_AS(bad(R"({"pattern":"zigzag","params":{"base":1}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"params":{"base":1}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"pattern":"stride","params":{"base":1,"delta":128}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"pattern":"scalar","params":{"base":-1}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"pattern":"twodelta","params":{"base":1,"delta1":1,"delta2":1,"group_len":6}})"),
                  ConfigError);
  CHECK_THROWS_AS(bad(R"({"pattern":"twodelta","params":{"base":1,"delta1":1,"delta2":1,"group_len":64}})"),
                  ConfigError);
  CHECK_THROWS_AS(bad(R"({"pattern":"raw","params":{"hex":"00"}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"pattern":"stride","params":{"base":1}})"), ConfigError);
}

TEST_CASE("trace text round trip") {
  const std::string text =
      "{\"wf\":0,\"start\":4}\n"
      "\n"
      "{\"wf\":0,\"dst\":1,\"val\":{\"pattern\":\"scalar\",\"params\":{\"base\":3}}}\n"
      "{\"wf\":0,\"src\":[null,1]}\n"
      "{\"wf\":0,\"src\":[1,1],\"dst\":2,\"val\":{\"pattern\":\"stride\",\"params\":{\"base\":3,\"delta\":1}}}\n"
      "{\"wf\":0,\"end\":true}\n";
  const auto t = parse(text);
  REQUIRE(t.size() == 5);
  CHECK(t[0].marker->window == 4);
  CHECK(t[1].line == 3);
  CHECK_FALSE(t[2].src0.has_value());
  CHECK(t[2].src1 == 1);
  CHECK(t[3].dest == 2);
  CHECK(t[4].marker->kind == Marker::Kind::End);

  std::ostringstream out;
  write_trace(out, t);
  const auto again = parse(out.str());
  std::ostringstream out2;
  write_trace(out2, again);
  CHECK(out.str() == out2.str());
  REQUIRE(again.size() == t.size());
  CHECK(again[3].dest_value == t[3].dest_value);
}

TEST_CASE("trace errors carry path and line") {
  CHECK(error_of("{\"wf\":0,\"start\":4}\n{\"wf\":0,\"dst\":1\n").find("t.jsonl:2:") == 0);
  CHECK(error_of("{\"wf\":0,\"start\":4}\n\n{\"wf\":0,\"dst\":1,\"val\":{\"pattern\":\"nope\"}}\n").find("t.jsonl:3:") == 0);
  CHECK(error_of("[1,2]\n").find("t.jsonl:1:") == 0);
  CHECK(error_of("{\"start\":4}\n").find("missing \"wf\"") != std::string::npos);
  CHECK(error_of("{\"wf\":0,\"start\":4}\n{\"wf\":0,\"src\":[1,2,3]}\n").find("t.jsonl:2:") == 0);
  const auto window = error_of("{\"wf\":0,\"start\":4}\n{\"wf\":0,\"src\":[9]}\n");
  CHECK(window.find("line 2") != std::string::npos);
  CHECK(window.find("outside window") != std::string::npos);
  CHECK_THROWS_AS(load_trace("/nonexistent/trace.jsonl"), ConfigError);
}

TEST_CASE("generated traces are deterministic and valid") {
  TraceProfile p;
  p.wavefronts = 4;
  p.instructions_per_wavefront = 50;
  p.state_change_prob = 0.2;
  const auto a = generate_trace(p);
  const auto b = generate_trace(p);
  std::ostringstream sa, sb;
  write_trace(sa, a.trace);
  write_trace(sb, b.trace);
  CHECK(sa.str() == sb.str());
  CHECK_NOTHROW(validate_trace(a.trace));
  CHECK(a.trace.size() == 4 * 50 + 8);
  p.seed = 2;
  std::ostringstream sc;
  write_trace(sc, generate_trace(p).trace);
  CHECK(sc.str() != sa.str());
}

TEST_CASE("generated layout: starts, round-robin body, ends") {
  TraceProfile p;
  p.wavefronts = 3;
  p.window = 8;
  p.instructions_per_wavefront = 4;
  const auto t = generate_trace(p).trace;
  for (int i = 0; i < 3; ++i) {
    CHECK(t[static_cast<std::size_t>(i)].marker->kind == Marker::Kind::Start);
    CHECK(t[static_cast<std::size_t>(i)].marker->window == 8);
    CHECK(t[t.size() - 3 + static_cast<std::size_t>(i)].marker->kind == Marker::Kind::End);
  }
  for (std::size_t i = 3; i < t.size() - 3; ++i) CHECK(t[i].wf == static_cast<int>((i - 3) % 3));
}

TEST_CASE("generator reads only written registers") {
  TraceProfile p;
  p.wavefronts = 2;
  p.instructions_per_wavefront = 300;
  const auto t = generate_trace(p).trace;
  std::map<int, std::set<int>> written;
  for (const auto& ins : t) {
    if (ins.marker) continue;
    for (const auto& s : {ins.src0, ins.src1}) {
      if (s) CHECK(written[ins.wf].count(*s) == 1);
    }
    if (ins.dest) written[ins.wf].insert(*ins.dest);
  }
}

TEST_CASE("realized mix follows the profile") {
  TraceProfile p;
  p.mix = {0.1, 0.2, 0.3, 0.4};
  const auto g = generate_trace(p);
  CHECK(g.stats.dest_writes == 16u * 256u);
  CHECK(g.stats.realized_fraction(ValueKind::Scalar) == doctest::Approx(0.1).epsilon(0.2));
  CHECK(g.stats.realized_fraction(ValueKind::TwoDelta) == doctest::Approx(0.3).epsilon(0.1));
  CHECK(g.stats.compressible_fraction() == doctest::Approx(0.6).epsilon(0.05));
  CHECK(g.stats.compression_ratio() > 1.0);
}

TEST_CASE("raw-only workload is incompressible") {
  TraceProfile p;
  p.wavefronts = 2;
  p.mix = {0.0, 0.0, 0.0, 1.0};
  const auto g = generate_trace(p);
  for (const auto& ins : g.trace) {
    if (ins.dest_value) CHECK_FALSE(try_compress(*ins.dest_value).has_value());
  }
  CHECK(g.stats.compressible_fraction() == 0.0);
  CHECK(g.stats.compression_ratio() == 1.0);
}

TEST_CASE("state change rate is realized") {
  TraceProfile p;
  p.mix = {0.3, 0.2, 0.0, 0.5};
  p.state_change_prob = 0.3;
  const auto g = generate_trace(p);
  const double rewrites = static_cast<double>(g.stats.dest_writes) - 16.0 * 16.0;
  CHECK(static_cast<double>(g.stats.state_changes) / rewrites == doctest::Approx(0.3).epsilon(0.1));
  CHECK(g.stats.compressible_fraction() == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("sixteen windows of sixteen tile the slice") {
  TraceProfile p;
  p.instructions_per_wavefront = 0;
  const auto t = generate_trace(p).trace;
  BaseRegisterTable windows;
  std::set<int> covered;
  for (const auto& ins : t) {
    if (!ins.marker || ins.marker->kind != Marker::Kind::Start) continue;
    const auto base = windows.allocate(ins.wf, ins.marker->window);
    REQUIRE(base.has_value());
    for (int i = 0; i < ins.marker->window; ++i) covered.insert(windows.translate(ins.wf, i));
  }
  CHECK(covered.size() == 256);
  CHECK(*covered.begin() == 0);
  CHECK(*covered.rbegin() == 255);
}

TEST_CASE("profile validation") {
  TraceProfile p;
  p.wavefronts = 17;
  try {
    p.validate();
    FAIL("expected window overflow");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("window overflow") != std::string::npos);
  }
  p = TraceProfile{};
  p.mix = {0.5, 0.5, 0.5, 0.0};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = TraceProfile{};
  p.mix = {0.9, 0.0, 0.0, 0.1};
  p.state_change_prob = 0.5;  // more than 2 * 0.1 switches per rewrite
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = TraceProfile{};
  p.sources_per_instruction = 3;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = TraceProfile{};
  p.raw_regular_block0_prob = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
