#include "rrcd/pipeline.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "rrcd/errors.hpp"

namespace rrcd {

namespace {

constexpr int kIssueInterval = 4;
constexpr int kDecompressStages = 2;
constexpr int kDrainCycles = 4;
constexpr int kBeatsPerRegister = 4;

std::string where(const TraceInstruction& ins, std::size_t index) {
  std::string s = "instruction " + std::to_string(index);
  if (ins.line != 0) s += " (line " + std::to_string(ins.line) + ")";
  return s;
}

class Fnv1a {
 public:
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void add_opt(const std::optional<int>& v) { add(v ? static_cast<std::uint64_t>(*v) : ~0ULL); }
  std::uint64_t value() const { return h_; }

 private:
  void byte(std::uint8_t b) {
    h_ ^= b;
    h_ *= 0x100000001b3ULL;
  }
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace

void validate_trace(const Trace& trace) {
  std::map<int, int> window;
  std::set<int> ended;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& ins = trace[i];
    auto fail = [&](const std::string& msg) { throw ConfigError(where(ins, i) + ": " + msg); };
    if (ins.wf < 0) fail("negative wavefront id");
    if (ins.marker) {
      if (ins.marker->kind == Marker::Kind::Start) {
        if (window.count(ins.wf)) fail("wavefront " + std::to_string(ins.wf) + " started twice");
        if (ins.marker->window < 1 || ins.marker->window > kSliceEntries) {
          fail("window length " + std::to_string(ins.marker->window) + " outside 1..256");
        }
        window[ins.wf] = ins.marker->window;
      } else {
        if (!window.count(ins.wf)) fail("end of wavefront " + std::to_string(ins.wf) + " that never started");
        if (!ended.insert(ins.wf).second) fail("wavefront " + std::to_string(ins.wf) + " ended twice");
      }
      continue;
    }
    const auto it = window.find(ins.wf);
    if (it == window.end()) fail("wavefront " + std::to_string(ins.wf) + " used before its start marker");
    if (ended.count(ins.wf)) fail("wavefront " + std::to_string(ins.wf) + " used after its end marker");
    if (ins.dest.has_value() != ins.dest_value.has_value()) fail("dst and val must be given together");
    for (const auto& r : {ins.src0, ins.src1, ins.dest}) {
      if (r && (*r < 0 || *r >= it->second)) {
        fail("register " + std::to_string(*r) + " outside window of length " + std::to_string(it->second));
      }
    }
  }
}

void DestRegisterBuffer::push(int block_index, const Block& b) {
  if (block_index != fill_) {
    throw ProtocolError("BRD expected block " + std::to_string(fill_) + ", got " + std::to_string(block_index));
  }
  blocks_[static_cast<std::size_t>(block_index)] = b;
  ++fill_;
}

void RunConfig::validate() const {
  if (max_wavefronts < 1 || max_wavefronts > kSliceEntries) throw ConfigError("max_wavefronts must be in 1..256");
  if (lds_latency < 0) throw ConfigError("lds_latency must be non-negative");
  if (extra_slice_latency < 0 || extra_slice_latency > 64) throw ConfigError("extra_slice_latency must be in 0..64");
}

void WriteBreakdown::add(WriteKind k) {
  switch (k) {
    case WriteKind::Regular: ++regular; return;
    case WriteKind::RedirectReliable: ++redirect_to_reliable; return;
    case WriteKind::RedirectFaulty: ++redirect_to_faulty; return;
    case WriteKind::LdsSpill: ++lds_spill; return;
  }
}

double OccupancyHistogram::fraction(OccupancyClass c) const {
  if (sampled_cycles == 0) return 0.0;
  return static_cast<double>(entry_cycles[static_cast<std::size_t>(c)]) /
         (static_cast<double>(sampled_cycles) * kSliceEntries);
}

double OccupancyHistogram::utilization() const {
  double sum = 0.0;
  for (int c = 0; c < 4; ++c) sum += fraction(static_cast<OccupancyClass>(c));
  return sum;
}

double SimReport::steady_regular_fraction() const {
  const auto rewrites = dest_writes - first_writes;
  return rewrites == 0 ? 1.0 : static_cast<double>(writes.regular) / static_cast<double>(rewrites);
}

struct Pipeline::Impl {
  struct SourceRead {
    int logical = 0;
    int phys = 0;
    RegisterEntry expected;
    TRRow row;
    RegisterEntry assembled;
  };

  struct InFlight {
    std::size_t index = 0;
    int wf = 0;
    int p = 0;
    std::size_t timeline_slot = 0;
    std::vector<SourceRead> srcs;
    bool has_dest = false;
    int dest_logical = 0;
    int dest_phys = 0;
    RegisterEntry value;
    std::optional<CompressedReg> verdict;
    PreemptiveRedirection pre;
    CompressorStream com;
    DestRegisterBuffer brd;
    TRRow dest_row;
    bool write_blocks = false;
    bool mispeculated = false;
  };

  struct Wavefront {
    int id = 0;
    int window = 0;
    std::deque<std::size_t> pending;
    bool resident = false;
    bool finished = false;
    int in_flight = 0;
    std::set<int> busy;
    std::map<int, RegisterEntry> golden;
  };

  struct DrainWrite {
    int entry = 0;
    int block = 0;
    Block data{};
  };

  struct Freeze {
    bool mispeculation = false;
    int remaining = 0;
    std::deque<DrainWrite> writes;
  };

  Impl(Trace t, RunConfig c)
      : trace(std::move(t)),
        config(std::move(c)),
        rrcd(config.mode == Mode::Rrcd),
        depth(rrcd ? kDecompressStages + config.extra_slice_latency : 0),
        map(config.fault_map ? *config.fault_map : generate_fault_map(scenario(config.scenario), config.seed)),
        slice(rrcd ? map : FaultMap{}) {
    if (rrcd) redir.emplace(map, config.lds_bytes);
    slice.set_strict(config.debug_invariants);
    home_class.fill(-1);

    std::map<int, std::size_t> by_id;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const auto& ins = trace[i];
      if (ins.marker) {
        if (ins.marker->kind == Marker::Kind::Start) {
          by_id[ins.wf] = wavefronts.size();
          wavefronts.push_back(Wavefront{ins.wf, ins.marker->window, {}, false, false, 0, {}, {}});
        }
        continue;
      }
      wavefronts[by_id.at(ins.wf)].pending.push_back(i);
    }

    report.mode = config.mode;
    report.scenario = config.scenario;
    report.seed = config.seed;
    report.config_hash = config_hash(trace, config);
    report.pipeline_latency = latency();
    report.faulty_blocks = map.total_faulty_blocks();
    report.faulty_fraction = fault_stats(map).faulty_fraction;
  }

  int latency() const { return 7 + depth; }
  int wb(int block) const { return 3 + depth + block; }

  bool done() const {
    return inflight.empty() && freezes.empty() &&
           std::all_of(wavefronts.begin(), wavefronts.end(), [](const Wavefront& w) { return w.finished; });
  }

  void step() {
    if (done()) return;
    slice.begin_cycle();
    if (!freezes.empty()) {
      frozen_cycle();
    } else {
      process_ends();
      admit();
      const std::size_t older = inflight.size();
      issue();
      for (std::size_t i = 0; i < older; ++i) advance(inflight[i]);
      retire();
      process_ends();
    }
    end_cycle();
  }

  void frozen_cycle() {
    auto& f = freezes.front();
    if (!f.writes.empty()) {
      const auto w = f.writes.front();
      f.writes.pop_front();
      write_block(w.entry, w.block, w.data);
      report.ledger.record(EnergyEvent::MispeculationExtraWrite);
    }
    ++(f.mispeculation ? report.stalls.mispeculation : report.stalls.lds);
    if (--f.remaining <= 0 && f.writes.empty()) freezes.pop_front();
  }

  void end_cycle() {
    report.occupancy.sampled_cycles += 1;
    for (std::size_t c = 0; c < 4; ++c) report.occupancy.entry_cycles[c] += static_cast<std::uint64_t>(class_counts[c]);
    if (config.dump_tr_cycle && *config.dump_tr_cycle == cycle) dump_tr();
    if (config.debug_invariants && dirty && redir) {
      ++report.invariant_checks;
      if (auto v = redir->check_invariants()) record_violation("cycle " + std::to_string(cycle) + ": " + *v);
    }
    dirty = false;
    ++cycle;
    report.cycles = cycle;
    report.ledger.cycles = cycle;
  }

  void record_violation(const std::string& msg) {
    if (report.invariant_violations++ == 0) report.first_invariant_violation = msg;
  }

  void dump_tr() {
    report.tr_dump = redir ? redir->dump_csv() : std::string("phys_reg,v,c,m,entry,block\n");
    tr_dumped = true;
  }

  void admit() {
    for (auto& w : wavefronts) {
      if (w.resident || w.finished) continue;
      if (static_cast<int>(resident.size()) >= config.max_wavefronts) return;
      if (!windows.allocate(w.id, w.window)) return;
      w.resident = true;
      resident[w.id] = &w;
    }
  }

  void process_ends() {
    for (auto it = resident.begin(); it != resident.end();) {
      Wavefront& w = *it->second;
      if (w.pending.empty() && w.in_flight == 0) {
        finish_wavefront(w);
        it = resident.erase(it);
      } else {
        ++it;
      }
    }
  }

  RegisterEntry read_functional(int phys) const {
    if (!redir) {
      RegisterEntry e;
      for (int b = 0; b < kBlocksPerEntry; ++b) e.set_block(b, slice.peek_block(phys, b));
      return e;
    }
    const TRRow& row = redir->tr_lookup(phys);
    if (row.spilled) return redir->spill().read(row.entry_index);
    if (row.compressed) {
      try {
        return decompress(CompressedReg::from_block(slice.peek_block(row.entry_index, row.block_index)));
      } catch (const DecodeError&) {
        return RegisterEntry{};
      }
    }
    RegisterEntry e;
    for (int b = 0; b < kBlocksPerEntry; ++b) e.set_block(b, slice.peek_block(row.entry_index, b));
    return e;
  }

  void finish_wavefront(Wavefront& w) {
    for (const auto& [logical, value] : w.golden) {
      const RegisterEntry actual = read_functional(windows.translate(w.id, logical));
      if (actual != value) ++report.integrity_violations;
      report.final_state[{w.id, logical}] = actual;
    }
    const auto& win = windows.window(w.id);
    for (int phys = win.base; phys < win.base + win.length; ++phys) set_occupancy(phys, std::nullopt);
    if (redir) {
      const auto summary = redir->release_window(w.id, windows);
      report.ledger.record(EnergyEvent::TrWrite, static_cast<std::uint64_t>(summary.rows_invalidated));
      dirty = true;
    }
    windows.release(w.id);
    w.resident = false;
    w.finished = true;
  }

  void set_occupancy(int phys, std::optional<bool> compressed) {
    auto& slot = home_class[static_cast<std::size_t>(phys)];
    if (slot >= 0) --class_counts[static_cast<std::size_t>(slot)];
    slot = -1;
    if (!compressed) return;
    const bool reliable = !map.has_fault(phys);
    const auto cls = reliable ? (*compressed ? OccupancyClass::ReliableCompressed : OccupancyClass::ReliableUncompressed)
                              : (*compressed ? OccupancyClass::FaultyCompressed : OccupancyClass::FaultyUncompressed);
    slot = static_cast<std::int8_t>(cls);
    ++class_counts[static_cast<std::size_t>(slot)];
  }

  bool blocked(const Wavefront& w) const {
    const auto& ins = trace[w.pending.front()];
    for (const auto& r : {ins.src0, ins.src1, ins.dest}) {
      if (r && w.busy.count(*r)) return true;
    }
    return false;
  }

  void issue() {
    if (cooldown > 0) {
      --cooldown;
      return;
    }
    if (resident.empty()) {
      ++report.stalls.idle;
      return;
    }
    bool hazard = false;
    auto start = resident.upper_bound(last_issued);
    for (std::size_t n = 0; n < resident.size(); ++n, ++start) {
      if (start == resident.end()) start = resident.begin();
      Wavefront& w = *start->second;
      if (w.pending.empty()) continue;
      if (blocked(w)) {
        hazard = true;
        continue;
      }
      issue_from(w);
      last_issued = w.id;
      cooldown = kIssueInterval - 1;
      return;
    }
    ++(hazard ? report.stalls.raw_hazard : report.stalls.idle);
  }

  void issue_from(Wavefront& w) {
    const std::size_t index = w.pending.front();
    const auto& ins = trace[index];
    InFlight f;
    f.index = index;
    f.wf = w.id;
    for (const auto& src : {ins.src0, ins.src1}) {
      if (!src) continue;
      SourceRead s;
      s.logical = *src;
      s.phys = windows.translate(w.id, *src);
      const auto g = w.golden.find(*src);
      if (g == w.golden.end()) {
        throw SimulationError(where(ins, index) + ": read before write of register " + std::to_string(*src) +
                              " in wavefront " + std::to_string(w.id));
      }
      s.expected = g->second;
      if (redir) {
        s.row = redir->tr_lookup_source(s.phys);
        report.ledger.record(EnergyEvent::TrRead);
      } else {
        s.row = TRRow{true, false, false, static_cast<std::uint8_t>(s.phys), 0};
      }
      f.srcs.push_back(s);
    }
    if (ins.dest) {
      f.has_dest = true;
      f.dest_logical = *ins.dest;
      f.dest_phys = windows.translate(w.id, *ins.dest);
      f.value = *ins.dest_value;
      f.verdict = try_compress(f.value);
      if (redir) {
        report.ledger.record(EnergyEvent::TrRead);
        f.pre = redir->usr_prealloc(redir->tr_lookup(f.dest_phys));
        report.ledger.record(EnergyEvent::UsrAlloc, static_cast<std::uint64_t>(f.pre.allocations()));
        dirty = true;
      }
      w.golden[f.dest_logical] = f.value;
      w.busy.insert(f.dest_logical);
    }
    if (config.record_timeline) {
      f.timeline_slot = report.timeline.size();
      report.timeline.push_back({index, w.id, cycle, 0});
    }
    w.pending.pop_front();
    ++w.in_flight;
    ++report.instructions;
    inflight.push_back(std::move(f));
  }

  Block read_block(int entry, int block) {
    report.ledger.record(EnergyEvent::SliceBlockRead);
    return slice.read_block(entry, block);
  }

  void write_block(int entry, int block, const Block& data) {
    report.ledger.record(EnergyEvent::SliceBlockWrite);
    slice.write_block(entry, block, data);
  }

  void lds_transfer() {
    report.ledger.record(EnergyEvent::LdsSpillAccess, kBeatsPerRegister);
    const int cycles = kBeatsPerRegister * config.lds_latency;
    if (cycles > 0) freezes.push_back(Freeze{false, cycles, {}});
  }

  void read_sources(InFlight& f, int block) {
    for (auto& s : f.srcs) {
      bool complete = false;
      if (s.row.spilled) {
        if (block != 0) continue;
        s.assembled = redir->spill().read(s.row.entry_index);
        lds_transfer();
        complete = true;
      } else if (s.row.compressed) {
        if (block != 0) continue;
        const Block raw = read_block(s.row.entry_index, s.row.block_index);
        report.ledger.record(EnergyEvent::DesBlock);
        try {
          s.assembled = decompress(CompressedReg::from_block(raw));
        } catch (const DecodeError&) {
          s.assembled = RegisterEntry{};
        }
        complete = true;
      } else {
        s.assembled.set_block(block, read_block(s.row.entry_index, block));
        complete = block == kBlocksPerEntry - 1;
      }
      if (complete && s.assembled != s.expected) ++report.integrity_violations;
    }
  }

  void commit(InFlight& f) {
    if (!redir) {
      report.writes.add(WriteKind::Regular);
      if (home_class[static_cast<std::size_t>(f.dest_phys)] < 0) ++report.first_writes;
      f.dest_row = TRRow{true, false, false, static_cast<std::uint8_t>(f.dest_phys), 0};
      f.write_blocks = true;
      ++report.dest_writes;
      set_occupancy(f.dest_phys, f.verdict.has_value());
      return;
    }
    const bool compressible = f.verdict.has_value();
    const bool speculated = f.com.speculation();
    if (compressible && !speculated) {
      throw SimulationError(where(trace[f.index], f.index) + ": compressible value rejected by speculation");
    }
    f.mispeculated = speculated && !compressible;
    const TRRow prev = redir->tr_lookup(f.dest_phys);
    if (f.mispeculated) {
      std::optional<BlockAddr> target;
      if (prev.valid && !prev.spilled && prev.compressed) {
        target = BlockAddr{prev.entry_index, prev.block_index};
      } else if (f.pre.compressed_slot) {
        target = f.pre.compressed_slot;
      }
      if (target) write_block(target->entry, target->block, f.brd.block(0));
    }
    CommitResult r;
    try {
      r = redir->usr_commit(f.dest_phys, compressible, f.pre);
    } catch (const SimulationError& e) {
      throw SimulationError(where(trace[f.index], f.index) + ": " + e.what());
    }
    dirty = true;
    if (!(r.row == r.previous)) report.ledger.record(EnergyEvent::TrWrite);
    report.writes.add(r.kind);
    if (!prev.valid) ++report.first_writes;
    ++report.dest_writes;
    f.dest_row = r.row;
    if (r.row.spilled) {
      redir->spill().write(r.row.entry_index, f.value);
      lds_transfer();
    } else if (compressible) {
      write_block(r.row.entry_index, r.row.block_index, f.verdict->to_block());
    } else if (!f.mispeculated) {
      f.write_blocks = true;
    }
    set_occupancy(f.dest_phys, compressible);
  }

  void verdict(InFlight& f) {
    if (f.com.result().has_value() != f.verdict.has_value()) {
      throw SimulationError(where(trace[f.index], f.index) + ": compressor verdict disagrees with the value");
    }
    if (!f.mispeculated) return;
    ++report.mispeculations;
    Freeze fr{true, kDrainCycles, {}};
    if (!f.dest_row.spilled) {
      for (int b = 0; b < kBlocksPerEntry; ++b) fr.writes.push_back({f.dest_row.entry_index, b, f.brd.block(b)});
    }
    freezes.push_back(std::move(fr));
  }

  void advance(InFlight& f) {
    const int p = ++f.p;
    if (p >= 1 && p <= kBlocksPerEntry) read_sources(f, p - 1);
    if (!f.has_dest) return;
    if (rrcd) {
      const int i = p - (wb(0) - 1);
      if (i >= 0 && i < kBlocksPerEntry) {
        const auto step = f.com.push(i, f.value.block(i));
        f.brd.push(i, f.value.block_copy(i));
        report.ledger.record(EnergyEvent::ComBlock);
        if (p == wb(0)) commit(f);
        if (step.verdict) verdict(f);
      }
    } else if (p == wb(0)) {
      commit(f);
    }
    const int i = p - wb(0);
    if (f.write_blocks && i >= 0 && i < kBlocksPerEntry) {
      write_block(f.dest_row.entry_index, i, f.value.block_copy(i));
    }
  }

  void retire() {
    while (!inflight.empty() && inflight.front().p >= latency() - 1) {
      InFlight& f = inflight.front();
      Wavefront& w = *resident.at(f.wf);
      if (f.has_dest) w.busy.erase(f.dest_logical);
      --w.in_flight;
      if (config.record_timeline) report.timeline[f.timeline_slot].retire_cycle = cycle;
      inflight.pop_front();
    }
  }

  SimReport& finalize() {
    while (!done()) step();
    if (config.dump_tr_cycle && !tr_dumped) dump_tr();
    sync();
    return report;
  }

  void sync() {
    report.read_port_cycles = slice.total_reads();
    report.write_port_cycles = slice.total_writes();
    report.faulty_block_writes = slice.faulty_block_writes();
    if (redir) {
      report.final_occupied_blocks = redir->bitmap().occupied_count();
      report.peak_spill_slots = redir->spill().peak_allocated();
    }
  }

  const Trace trace;
  const RunConfig config;
  const bool rrcd;
  const int depth;
  FaultMap map;
  SliceArray slice;
  std::optional<RedirectionUnit> redir;
  BaseRegisterTable windows;
  std::vector<Wavefront> wavefronts;
  std::map<int, Wavefront*> resident;
  std::deque<InFlight> inflight;
  std::deque<Freeze> freezes;
  std::array<std::int8_t, kSliceEntries> home_class{};
  std::array<int, 4> class_counts{};
  int last_issued = -1;
  int cooldown = 0;
  bool dirty = false;
  bool tr_dumped = false;
  std::uint64_t cycle = 0;
  SimReport report;
};

Pipeline::Pipeline(Trace trace, RunConfig config) {
  config.validate();
  validate_trace(trace);
  impl_ = std::make_unique<Impl>(std::move(trace), std::move(config));
}

Pipeline::~Pipeline() = default;

void Pipeline::step() { impl_->step(); }
bool Pipeline::done() const { return impl_->done(); }
SimReport Pipeline::finish() { return impl_->finalize(); }
std::uint64_t Pipeline::cycle() const { return impl_->cycle; }

const SimReport& Pipeline::report() const {
  impl_->sync();
  return impl_->report;
}

const SliceArray& Pipeline::slice() const { return impl_->slice; }
const RedirectionUnit* Pipeline::redirection() const { return impl_->redir ? &*impl_->redir : nullptr; }
const BaseRegisterTable& Pipeline::windows() const { return impl_->windows; }
int Pipeline::latency() const { return impl_->latency(); }

SimReport run(const Trace& trace, const RunConfig& config) {
  Pipeline p(trace, config);
  return p.finish();
}

std::uint64_t config_hash(const Trace& trace, const RunConfig& config) {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(config.mode));
  h.add(static_cast<std::uint64_t>(config.scenario));
  h.add(config.seed);
  h.add(config.fault_map ? 1 : 0);
  if (config.fault_map) {
    for (int e = 0; e < kSliceEntries; ++e) h.add(config.fault_map->entry_blocks(e).to_ulong());
  }
  h.add(static_cast<std::uint64_t>(config.max_wavefronts));
  h.add(config.lds_bytes);
  h.add(static_cast<std::uint64_t>(config.lds_latency));
  h.add(static_cast<std::uint64_t>(config.extra_slice_latency));
  h.add(trace.size());
  for (const auto& ins : trace) {
    h.add(static_cast<std::uint64_t>(ins.wf));
    if (ins.marker) {
      h.add(ins.marker->kind == Marker::Kind::Start ? 1 : 2);
      h.add(static_cast<std::uint64_t>(ins.marker->window));
      continue;
    }
    h.add(0);
    h.add_opt(ins.src0);
    h.add_opt(ins.src1);
    h.add_opt(ins.dest);
    if (ins.dest_value) {
      for (auto lane : ins.dest_value->lanes) h.add(lane);
    }
  }
  return h.value();
}

}  // namespace rrcd
