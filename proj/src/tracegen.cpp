#include "rrcd/tracegen.hpp"

#include <cmath>
#include <random>

#include "rrcd/errors.hpp"

namespace rrcd {

namespace {

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::int8_t nonzero_delta(std::mt19937_64& rng) {
  const auto d = static_cast<int>(rng() % 255) - 127;  // -127..127
  return static_cast<std::int8_t>(d >= 0 ? d + 1 : d);
}

std::int8_t any_delta(std::mt19937_64& rng) { return static_cast<std::int8_t>(static_cast<int>(rng() % 256) - 128); }

ValueKind classify(const RegisterEntry& v) {
  const auto c = try_compress(v);
  if (!c) return ValueKind::Raw;
  return static_cast<ValueKind>(c->pattern);
}

RegisterEntry make_raw(std::mt19937_64& rng, bool regular_block0) {
  for (;;) {
    RegisterEntry e;
    for (auto& lane : e.lanes) lane = static_cast<std::uint32_t>(rng());
    if (regular_block0) {
      const auto base = static_cast<std::uint32_t>(rng());
      const auto d = static_cast<std::uint32_t>(static_cast<std::int32_t>(any_delta(rng)));
      for (std::uint32_t k = 0; k < kLanesPerBlock; ++k) e.lanes[k] = base + k * d;
    }
    if (!try_compress(e)) return e;
  }
}

RegisterEntry make_compressible(std::mt19937_64& rng, ValueKind kind) {
  for (;;) {
    CompressedReg c;
    c.base = static_cast<std::uint32_t>(rng());
    switch (kind) {
      case ValueKind::Scalar: c.pattern = Pattern::Scalar; break;
      case ValueKind::Stride:
        c.pattern = Pattern::Stride;
        c.delta1 = nonzero_delta(rng);
        break;
      default:
        c.pattern = Pattern::TwoDelta;
        c.delta1 = any_delta(rng);
        c.delta2 = any_delta(rng);
        c.group_log2 = static_cast<std::uint8_t>(1 + rng() % kMaxGroupLog2);
        break;
    }
    RegisterEntry e = decompress(c);
    if (classify(e) == kind) return e;
  }
}

}  // namespace

void TraceProfile::validate() const {
  if (wavefronts < 1) throw ConfigError("wavefronts must be at least 1");
  if (window < 1) throw ConfigError("window must be at least 1");
  if (static_cast<long long>(wavefronts) * window > kSliceEntries) {
    throw ConfigError("window overflow: " + std::to_string(wavefronts) + " wavefronts x " + std::to_string(window) +
                      " registers exceed 256 slice entries");
  }
  if (instructions_per_wavefront < 0) throw ConfigError("instructions_per_wavefront must be non-negative");
  if (sources_per_instruction < 0 || sources_per_instruction > 2) {
    throw ConfigError("sources_per_instruction must be 0, 1 or 2");
  }
  double sum = 0.0;
  for (double p : mix) {
    if (!(p >= 0.0)) throw ConfigError("negative or NaN probability in pattern mix");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("pattern mix sums to " + std::to_string(sum) + ", expected 1");
  for (double p : {state_change_prob, raw_regular_block0_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("probabilities must lie in [0, 1]");
  }
  const double q = 1.0 - mix[3];
  const double max_change = 2.0 * std::min(q, 1.0 - q);
  if (state_change_prob > max_change + 1e-12) {
    throw ConfigError("state-change probability " + std::to_string(state_change_prob) +
                      " not sustainable with compressible share " + std::to_string(q) + " (max " +
                      std::to_string(max_change) + ")");
  }
}

double TraceGenStats::realized_fraction(ValueKind k) const {
  return dest_writes == 0 ? 0.0
                          : static_cast<double>(realized[static_cast<std::size_t>(k)]) /
                                static_cast<double>(dest_writes);
}

double TraceGenStats::compressible_fraction() const {
  return dest_writes == 0 ? 0.0 : 1.0 - realized_fraction(ValueKind::Raw);
}

double TraceGenStats::compression_ratio() const {
  if (dest_writes == 0) return 1.0;
  const double raw = static_cast<double>(realized[3]);
  const double comp = static_cast<double>(dest_writes) - raw;
  return static_cast<double>(dest_writes) * kEntryBytes / (comp * kBlockBytes + raw * kEntryBytes);
}

GeneratedTrace generate_trace(const TraceProfile& profile) {
  profile.validate();
  std::mt19937_64 rng(profile.seed);
  const double q = 1.0 - profile.mix[3];
  // Balanced switching: q * to_raw = (1 - q) * to_comp, average change rate = state_change_prob.
  const double to_raw = q > 0.0 ? profile.state_change_prob / (2.0 * q) : 0.0;
  const double to_comp = q < 1.0 ? profile.state_change_prob / (2.0 * (1.0 - q)) : 0.0;

  GeneratedTrace out;
  auto draw_compressible_kind = [&] {
    double u = unit_draw(rng) * q;
    for (int k = 0; k < 3; ++k) {
      if (u < profile.mix[static_cast<std::size_t>(k)]) return static_cast<ValueKind>(k);
      u -= profile.mix[static_cast<std::size_t>(k)];
    }
    for (int k = 2; k >= 0; --k) {
      if (profile.mix[static_cast<std::size_t>(k)] > 0.0) return static_cast<ValueKind>(k);
    }
    return ValueKind::Scalar;
  };
  auto make_value = [&](bool compressible) {
    if (compressible) return make_compressible(rng, draw_compressible_kind());
    const bool regular0 = unit_draw(rng) < profile.raw_regular_block0_prob;
    if (regular0) ++out.stats.regular_block0_raw;
    return make_raw(rng, regular0);
  };

  std::vector<std::vector<TraceInstruction>> streams(static_cast<std::size_t>(profile.wavefronts));
  for (int wf = 0; wf < profile.wavefronts; ++wf) {
    std::vector<std::optional<bool>> state(static_cast<std::size_t>(profile.window));
    std::vector<int> written;
    auto& stream = streams[static_cast<std::size_t>(wf)];
    for (int i = 0; i < profile.instructions_per_wavefront; ++i) {
      std::optional<int> src[2];
      if (!written.empty()) {
        for (int s = 0; s < profile.sources_per_instruction; ++s) {
          src[s] = written[rng() % written.size()];
        }
      }
      const int dest = static_cast<int>(rng() % static_cast<std::uint64_t>(profile.window));
      auto& st = state[static_cast<std::size_t>(dest)];
      bool compressible;
      if (!st) {
        compressible = unit_draw(rng) < q;
        written.push_back(dest);
      } else {
        const double flip = *st ? to_raw : to_comp;
        compressible = unit_draw(rng) < flip ? !*st : *st;
        if (compressible != *st) ++out.stats.state_changes;
      }
      st = compressible;
      RegisterEntry value = make_value(compressible);
      ++out.stats.realized[static_cast<std::size_t>(classify(value))];
      ++out.stats.dest_writes;
      stream.push_back(TraceInstruction::op(wf, src[0], src[1], dest, std::move(value)));
    }
  }

  for (int wf = 0; wf < profile.wavefronts; ++wf) out.trace.push_back(TraceInstruction::start(wf, profile.window));
  for (int i = 0; i < profile.instructions_per_wavefront; ++i) {
    for (auto& stream : streams) out.trace.push_back(std::move(stream[static_cast<std::size_t>(i)]));
  }
  for (int wf = 0; wf < profile.wavefronts; ++wf) out.trace.push_back(TraceInstruction::end(wf));
  return out;
}

}  // namespace rrcd
