#include <doctest.h>

#include <sstream>

#include "rrcd/errors.hpp"
#include "rrcd/faultmap.hpp"

using namespace rrcd;

TEST_CASE("scenario table") {
  CHECK(scenario(ScenarioKind::Comun).vdd_mv == 419);
  CHECK(scenario(ScenarioKind::Agrupado).vdd_mv == 497);
  CHECK(scenario(ScenarioKind::Disperso).vdd_mv == 371);
  CHECK(scenario(ScenarioKind::Smoothing).vdd_mv == 600);
  CHECK_FALSE(scenario(ScenarioKind::Conventional).vdd_mv.has_value());
  for (auto k : {ScenarioKind::Comun, ScenarioKind::Agrupado, ScenarioKind::Disperso, ScenarioKind::Conventional,
                 ScenarioKind::Smoothing}) {
    CHECK_NOTHROW(scenario(k).validate());
  }
  CHECK(scenario(ScenarioKind::Conventional).class_distribution == std::array<double, 5>{1, 0, 0, 0, 0});
  CHECK(scenario(ScenarioKind::Smoothing).class_distribution == std::array<double, 5>{1, 0, 0, 0, 0});
}

TEST_CASE("scenario names") {
  CHECK(parse_scenario("Comun") == ScenarioKind::Comun);
  CHECK(parse_scenario("común") == ScenarioKind::Comun);
  CHECK(parse_scenario("DISPERSO") == ScenarioKind::Disperso);
  CHECK(parse_scenario("suav") == ScenarioKind::Smoothing);
  CHECK(parse_scenario("conv") == ScenarioKind::Conventional);
  CHECK_THROWS_AS(parse_scenario("mild"), ConfigError);
  for (auto k : {ScenarioKind::Comun, ScenarioKind::Agrupado, ScenarioKind::Disperso}) {
    CHECK(parse_scenario(to_string(k)) == k);
  }
}

TEST_CASE("distribution must sum to one") {
  ReliabilityScenario s{ScenarioKind::Comun, 419, {0.5, 0.2, 0.2, 0.0, 0.0}};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_AS(generate_fault_map(s, 1), ConfigError);
  s.class_distribution = {1.2, -0.2, 0, 0, 0};
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("conventional map is fault-free") {
  const auto m = generate_fault_map(scenario(ScenarioKind::Conventional), 0);
  CHECK(m.total_faulty_blocks() == 0);
  const auto st = fault_stats(m);
  CHECK(st.class_counts[0] == 256);
  CHECK(st.faulty_fraction == 0.0);
}

TEST_CASE("generated entries hold 0, 2, 3 or 4 faulty blocks") {
  for (auto k : {ScenarioKind::Comun, ScenarioKind::Agrupado, ScenarioKind::Disperso}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto m = generate_fault_map(scenario(k), seed);
      for (int e = 0; e < kSliceEntries; ++e) {
        const int n = m.faulty_blocks(e);
        REQUIRE((n == 0 || n == 2 || n == 3 || n == 4));
        if (m.ecp_repaired(e)) REQUIRE(n == 0);
      }
    }
  }
}

TEST_CASE("generation is a pure function of scenario and seed") {
  const auto a = generate_fault_map(scenario(ScenarioKind::Disperso), 42);
  const auto b = generate_fault_map(scenario(ScenarioKind::Disperso), 42);
  const auto c = generate_fault_map(scenario(ScenarioKind::Disperso), 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("fault stats on a constructed map") {
  FaultMap m;
  int e = 0;
  for (int i = 0; i < 51; ++i) m.set_entry(e++, std::bitset<4>(0b0011));
  for (int i = 0; i < 26; ++i) m.set_entry(e++, std::bitset<4>(0b0111));
  for (int i = 0; i < 8; ++i) m.set_entry(e++, std::bitset<4>(0b1111));
  const auto st = fault_stats(m);
  CHECK(st.class_counts[1] == 51);
  CHECK(st.class_counts[2] == 26);
  CHECK(st.class_counts[3] == 8);
  CHECK(st.faulty_fraction == doctest::Approx(85.0 / 256.0));
  int total = 0;
  for (int c : st.class_counts) total += c;
  CHECK(total == 256);
  CHECK(m.entry_class(0) == EntryClass::Faulty2);
  CHECK(m.entry_class(60) == EntryClass::Faulty3);
  CHECK(m.entry_class(80) == EntryClass::Dead);
  CHECK(m.entry_class(200) == EntryClass::Reliable);
}

TEST_CASE("single faulty block is not representable") {
  FaultMap m;
  CHECK_THROWS_AS(m.set_entry(3, std::bitset<4>(0b0100)), ConfigError);
  CHECK_THROWS_AS(m.set_entry(256, std::bitset<4>(0b0000)), ConfigError);
  CHECK_THROWS_AS(m.is_faulty(0, 4), ConfigError);
}

TEST_CASE("map file round trip") {
  const auto m = generate_fault_map(scenario(ScenarioKind::Agrupado), 9);
  FaultMapFile f{m, ScenarioKind::Agrupado, 497, 9};
  std::stringstream ss;
  write_fault_map(ss, f);
  const auto back = read_fault_map(ss, "mem");
  CHECK(back.map == m);
  CHECK(back.scenario == ScenarioKind::Agrupado);
  CHECK(back.vdd_mv == 497);
  CHECK(back.seed == 9);
  CHECK(fault_stats(back.map).bit_class_counts == fault_stats(m).bit_class_counts);
}

TEST_CASE("malformed map files report path and line") {
  const auto m = generate_fault_map(scenario(ScenarioKind::Comun), 1);
  std::stringstream ss;
  write_fault_map(ss, FaultMapFile{m, ScenarioKind::Comun, 419, 1});
  std::string text = ss.str();
  const auto row5 = text.find('\n', text.find('\n') + 1);  // end of line 2
  std::string bad = text;
  bad.replace(row5 + 1, 4, "01x0");
  std::stringstream in(bad);
  try {
    read_fault_map(in, "maps/bad.map");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("maps/bad.map:3:", 0) == 0);
  }
  std::stringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_fault_map(truncated, "t"), ConfigError);
  std::stringstream no_header("");
  CHECK_THROWS_AS(read_fault_map(no_header, "e"), ConfigError);
}
