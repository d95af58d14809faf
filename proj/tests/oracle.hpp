#pragma once

// Reference pattern checkers for the compression tests. They work on lane
// differences instead of the closed-form lane equations the library uses.

#include <cstdint>
#include <optional>
#include <random>

#include "rrcd/compression.hpp"

namespace oracle {

inline bool fits8(std::int64_t v) { return v >= -128 && v <= 127; }

inline std::int32_t diff(std::uint32_t a, std::uint32_t b) { return static_cast<std::int32_t>(a - b); }

inline bool is_scalar(const rrcd::RegisterEntry& e) {
  for (int k = 1; k < rrcd::kLanes; ++k) {
    if (e.lanes[k] != e.lanes[0]) return false;
  }
  return true;
}

inline std::optional<std::int8_t> stride_delta(const rrcd::RegisterEntry& e) {
  const std::int32_t d = diff(e.lanes[1], e.lanes[0]);
  if (!fits8(d)) return std::nullopt;
  for (int k = 1; k + 1 < rrcd::kLanes; ++k) {
    if (diff(e.lanes[k + 1], e.lanes[k]) != d) return std::nullopt;
  }
  return static_cast<std::int8_t>(d);
}

struct TwoDelta {
  int group_len;
  std::int8_t d1, d2;
};

inline std::optional<TwoDelta> two_delta(const rrcd::RegisterEntry& e, int g) {
  const std::int32_t d1 = diff(e.lanes[1], e.lanes[0]);
  const std::int32_t d2 = diff(e.lanes[g], e.lanes[0]);
  if (!fits8(d1) || !fits8(d2)) return std::nullopt;
  for (int k = 0; k + 1 < rrcd::kLanes; ++k) {
    if ((k + 1) % g != 0 && diff(e.lanes[k + 1], e.lanes[k]) != d1) return std::nullopt;
  }
  for (int k = 0; k + g < rrcd::kLanes; ++k) {
    if (diff(e.lanes[k + g], e.lanes[k]) != d2) return std::nullopt;
  }
  return TwoDelta{g, static_cast<std::int8_t>(d1), static_cast<std::int8_t>(d2)};
}

/// Canonical encoding: Scalar, then Stride, then TwoDelta with the smallest group.
inline std::optional<rrcd::CompressedReg> canonical(const rrcd::RegisterEntry& e) {
  using rrcd::Pattern;
  if (is_scalar(e)) return rrcd::CompressedReg{Pattern::Scalar, e.lanes[0], 0, 0, 0};
  if (auto d = stride_delta(e)) return rrcd::CompressedReg{Pattern::Stride, e.lanes[0], *d, 0, 0};
  for (int log2 = 1; log2 <= rrcd::kMaxGroupLog2; ++log2) {
    if (auto t = two_delta(e, 1 << log2)) {
      return rrcd::CompressedReg{Pattern::TwoDelta, e.lanes[0], t->d1, t->d2, static_cast<std::uint8_t>(log2)};
    }
  }
  return std::nullopt;
}

/// Exhaustive search over every Stride delta and every TwoDelta (group, d1, d2).
inline bool exhaustive_compressible(const rrcd::RegisterEntry& e) {
  if (is_scalar(e)) return true;
  const std::uint32_t base = e.lanes[0];
  for (int d = -128; d <= 127; ++d) {
    bool ok = true;
    for (int k = 0; k < rrcd::kLanes && ok; ++k) ok = e.lanes[k] == base + static_cast<std::uint32_t>(k * d);
    if (ok) return true;
  }
  for (int g = 2; g <= 32; g *= 2) {
    for (int d1 = -128; d1 <= 127; ++d1) {
      if (e.lanes[1] != base + static_cast<std::uint32_t>(d1)) continue;
      for (int d2 = -128; d2 <= 127; ++d2) {
        bool ok = true;
        for (int k = 0; k < rrcd::kLanes && ok; ++k) {
          ok = e.lanes[k] == base + static_cast<std::uint32_t>((k % g) * d1 + (k / g) * d2);
        }
        if (ok) return true;
      }
    }
  }
  return false;
}

/// Mixture of uniform, patterned, boundary and nearly patterned entries.
inline rrcd::RegisterEntry random_entry(std::mt19937_64& rng) {
  rrcd::RegisterEntry e;
  const auto kind = rng() % 8;
  const auto base = static_cast<std::uint32_t>(rng());
  auto delta = [&](bool wide) {
    if (wide) return static_cast<std::int32_t>(rng() % 300) - 150;
    return static_cast<std::int32_t>(rng() % 256) - 128;
  };
  if (kind == 0) {
    for (auto& l : e.lanes) l = static_cast<std::uint32_t>(rng());
    return e;
  }
  const bool wide = rng() % 4 == 0;
  const std::int32_t d1 = kind == 1 ? 0 : delta(wide);
  const std::int32_t d2 = delta(wide);
  const int g = kind >= 4 ? 1 << (1 + rng() % 6) : 64;
  for (int k = 0; k < rrcd::kLanes; ++k) {
    e.lanes[k] = base + static_cast<std::uint32_t>((k % g) * d1 + (k / g) * d2);
  }
  if (kind == 3 || kind == 7) e.lanes[rng() % rrcd::kLanes] ^= 1u << (rng() % 32);
  return e;
}

}  // namespace oracle
