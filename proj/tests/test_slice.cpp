#include <doctest.h>

#include "rrcd/errors.hpp"
#include "rrcd/slice.hpp"
#include "rrcd/windows.hpp"

using namespace rrcd;

namespace {

Block pattern(std::uint32_t seed) {
  Block b;
  for (int k = 0; k < kLanesPerBlock; ++k) b[k] = seed * 2654435761u + k;
  return b;
}

FaultMap one_faulty_entry(int entry) {
  FaultMap m;
  m.set_entry(entry, std::bitset<4>(0b0101));  // blocks 0 and 2
  return m;
}

}  // namespace

TEST_CASE("write then read a reliable block") {
  SliceArray s;
  s.write_block(10, 3, pattern(1));
  s.begin_cycle();
  CHECK(s.read_block(10, 3) == pattern(1));
  CHECK(s.uninitialized_reads() == 0);
}

TEST_CASE("faulty block reads are corrupted") {
  SliceArray s(one_faulty_entry(4));
  s.write_block(4, 0, pattern(2));
  s.begin_cycle();
  const Block got = s.read_block(4, 0);
  CHECK(got != pattern(2));
  CHECK((got[0] ^ pattern(2)[0]) == SliceArray::kCorruptionMask);
  CHECK(s.faulty_block_writes() == 1);
  s.begin_cycle();
  s.write_block(4, 1, pattern(3));
  s.begin_cycle();
  CHECK(s.read_block(4, 1) == pattern(3));
}

TEST_CASE("strict mode rejects faulty writes") {
  SliceArray s(one_faulty_entry(4));
  s.set_strict(true);
  CHECK_THROWS_AS(s.write_block(4, 2, pattern(1)), SimulationError);
  CHECK_NOTHROW(s.write_block(4, 3, pattern(1)));
}

TEST_CASE("port discipline") {
  SliceArray s;
  s.read_block(0, 0);
  s.read_block(1, 1);
  CHECK_THROWS_AS(s.read_block(2, 2), SimulationError);
  s.write_block(0, 0, pattern(0));
  CHECK_THROWS_AS(s.write_block(0, 1, pattern(0)), SimulationError);
  s.begin_cycle();
  CHECK_NOTHROW(s.read_block(2, 2));
  CHECK_NOTHROW(s.write_block(0, 1, pattern(0)));
  CHECK(s.total_reads() == 3);
  CHECK(s.total_writes() == 2);
}

TEST_CASE("range checks and uninitialized reads") {
  SliceArray s;
  CHECK_THROWS_AS(s.read_block(256, 0), SimulationError);
  CHECK_THROWS_AS(s.write_block(0, 4, pattern(0)), SimulationError);
  CHECK(s.read_block(7, 1) == Block{});
  CHECK(s.uninitialized_reads() == 1);
}

TEST_CASE("fault-free slice accepts all 1024 blocks") {
  SliceArray s(generate_fault_map(scenario(ScenarioKind::Conventional), 0));
  s.set_strict(true);
  for (int e = 0; e < kSliceEntries; ++e) {
    for (int b = 0; b < kBlocksPerEntry; ++b) {
      s.begin_cycle();
      s.write_block(e, b, pattern(static_cast<std::uint32_t>(e * 4 + b)));
    }
  }
  CHECK(s.faulty_block_writes() == 0);
  CHECK(s.peek_block(255, 3) == pattern(1023));
}

TEST_CASE("translate") {
  BaseRegisterTable t;
  REQUIRE(t.allocate(0, 48) == 0);
  REQUIRE(t.allocate(1, 16) == 48);
  CHECK(t.translate(1, 2) == 50);
  CHECK(t.translate(0, 0) == 0);
  CHECK_THROWS_AS(t.translate(1, 16), ConfigError);
  CHECK_THROWS_AS(t.translate(1, -1), ConfigError);
  CHECK_THROWS_AS(t.translate(7, 0), ConfigError);
}

TEST_CASE("window at the top of the slice") {
  BaseRegisterTable t;
  REQUIRE(t.allocate(0, 240) == 0);
  REQUIRE(t.allocate(1, 16) == 240);
  CHECK(t.translate(1, 15) == 255);
  CHECK_FALSE(t.allocate(2, 1).has_value());
}

TEST_CASE("first fit reuses released windows") {
  BaseRegisterTable t;
  for (int wf = 0; wf < 16; ++wf) REQUIRE(t.allocate(wf, 16) == wf * 16);
  CHECK_FALSE(t.allocate(16, 1).has_value());
  t.release(3);
  t.release(4);
  CHECK(t.allocate(16, 20) == 48);
  CHECK(t.allocate(17, 12) == 68);
  CHECK_THROWS_AS(t.allocate(16, 1), ConfigError);
  CHECK_THROWS_AS(t.allocate(99, 0), ConfigError);
  CHECK_THROWS_AS(t.release(99), ConfigError);
  CHECK_FALSE(t.resident(3));
}
