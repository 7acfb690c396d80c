// Copyright 2026 The Faast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Run from ctest with FAAST_CLI pointing at the CLI.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cluster.hpp"
#include "faast/error.hpp"
#include "faast/harness.hpp"
#include "faast/policies.hpp"
#include "faast/scaling.hpp"
#include "faast/trace.hpp"
#include "support.hpp"

#ifndef FAAST_CLI
#define FAAST_CLI "faast"
#endif

using namespace faast;
namespace fs = std::filesystem;
using faast::testing::TestCluster;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

std::string run_command(const std::string& cmd, int& status) {
  std::string out;
  FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
  if (pipe == nullptr) {
    status = -1;
    return out;
  }
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
  status = ::pclose(pipe);
  return out;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir() {
  auto dir = fs::temp_directory_path() /
             ("faast-acceptance-" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// 1. Counter consistency, through the CLI.

Outcome counter_consistency() {
  int status = 0;
  auto out = run_command(std::string("\"") + FAAST_CLI +
                             "\" counter --instances 5 --target 1000 --mode all",
                         status);
  if (status != 0) return {false, "cli failed: " + out};
  auto rows = csv_rows(out);
  if (rows.size() != 7 || rows[0].size() != 7) return {false, "unexpected output: " + out};
  std::map<std::string, std::pair<long, double>> by_mode;
  std::vector<double> e2e;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    long inc = std::stol(rows[i][4]);
    double ms = std::stod(rows[i][5]);
    by_mode[rows[i][0]] = {inc, ms};
    e2e.push_back(ms);
  }
  bool ok = by_mode["storage-sync-storage"].first == 0 && by_mode["owner-sync-owner"].first == 0 &&
            by_mode["owner-sync-local"].first > 0 && by_mode["local-sync-local"].first > 0 &&
            by_mode["local-async-local"].first > 0;
  bool monotone = std::is_sorted(e2e.rbegin(), e2e.rend());
  std::ostringstream d;
  d << "inconsistencies";
  for (std::size_t i = 1; i < rows.size(); ++i) d << ' ' << rows[i][0] << '=' << rows[i][4];
  d << "; e2e non-increasing=" << (monotone ? "yes" : "no");
  return {ok && monotone, d.str()};
}

// ---------------------------------------------------------------------------
// 2. Bandwidth scaling.

Outcome bandwidth_scaling() {
  BandwidthProfile p;  // 90 MB/s storage, 500 MB/s instances
  auto small = bw_sweep({400 * kKB}, {1, 2, 4}, p, false);
  bool small_ok = small[0].fetch < small[1].fetch && small[0].fetch < small[2].fetch;
  auto loaded = bw_sweep({800 * kMB}, {1, 4}, p, true);
  auto cold = bw_sweep({800 * kMB}, {1, 4}, p, false);
  double gain_loaded = 1 - loaded[1].fetch / loaded[0].fetch;
  double gain_cold = 1 - cold[1].fetch / cold[0].fetch;
  bool ok = small_ok && gain_loaded >= 0.50 && gain_cold >= 0.34;
  return {ok, std::string("400KB cold fastest at N=1: ") + (small_ok ? "yes" : "no") +
                  "; 800MB N=4 vs N=1 " + fmt("%.1f%% faster loaded", 100 * gain_loaded) +
                  fmt(" (need >=50), %.1f%% faster cold (need >=34)", 100 * gain_cold)};
}

// ---------------------------------------------------------------------------
// 3. choose_fanout vs exhaustive evaluation.

Outcome fanout_oracle() {
  std::mt19937_64 rng(303);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t bytes = 1 + rng() % (2000 * kMB);
    double load = static_cast<double>(rng() % 5000);
    double bs = 10 + static_cast<double>(rng() % 300);
    double inst = 50 + static_cast<double>(rng() % 2000);
    bool loaded = rng() % 2 == 0;
    BandwidthProfile p{Millis(load), bs, inst};
    int got = static_cast<int>(choose_fanout(bytes, p, 1, loaded));
    int want = testing::oracle_fanout(static_cast<double>(bytes), load / 1000, bs, inst, 1, loaded);
    if (got != want) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in 1000 inputs"};
}

// ---------------------------------------------------------------------------
// 4. Consistent-hashing remap and balance.

Outcome hashing_remap() {
  std::vector<ObjectKey> keys;
  std::mt19937_64 rng(404);
  for (int i = 0; i < 10'000; ++i) keys.emplace_back("bench", "obj-" + std::to_string(rng()));
  double worst_remap = 0;
  double worst_spread = 0;
  MembershipView view;
  view = add_cachelet(view, CacheletId{"c0"});
  for (int n = 1; n <= 8; ++n) {
    auto grown = add_cachelet(view, CacheletId{"c" + std::to_string(n)});
    std::map<CacheletId, int> load;
    int moved = 0;
    for (const auto& k : keys) {
      auto after = owner_of(k, grown);
      if (owner_of(k, view) != after) ++moved;
      ++load[after];
    }
    double expected = 1.0 / (n + 1);
    worst_remap = std::max(worst_remap, std::abs(moved / 10'000.0 - expected));
    for (const auto& [id, count] : load) {
      worst_spread = std::max(worst_spread, std::abs(count / 10'000.0 - expected));
    }
    view = grown;
  }
  bool ok = worst_remap <= 0.10 && worst_spread <= 0.10;
  return {ok, fmt("max remap deviation %.1f points", 100 * worst_remap) +
                  fmt(", max load deviation %.1f points (limit 10)", 100 * worst_spread)};
}

// ---------------------------------------------------------------------------
// 5. Pre-warm benefit on a rarely invoked app.

double steady_latency(const ReplayConfig& cfg, const std::vector<TraceEvent>& trace) {
  auto r = replay(trace, cfg, 5);
  double sum = 0;
  int n = 0;
  for (std::size_t i = 3; i < r.invocations.size(); ++i) {
    sum += r.invocations[i].latency.count();
    ++n;
  }
  return n == 0 ? 0 : sum / n;
}

Outcome prewarm_benefit() {
  // Hourly invocations, each reading the same six 22.5MB objects (135MB).
  std::vector<TraceEvent> trace;
  for (int i = 0; i < 24; ++i) {
    Millis t(i * 3'600'000.0);
    trace.push_back({t, "rare", "predict", TraceOp::kInvoke, std::nullopt, 0, 0});
    for (int k = 0; k < 6; ++k) {
      trace.push_back({t, "rare", "predict", TraceOp::kRead,
                       ObjectKey("model", "part-" + std::to_string(k)), 22'500'000, 0});
    }
  }
  ReplayConfig on;
  on.default_exec = Millis(1100);
  ReplayConfig off = on;
  off.prewarm_enabled = false;
  ReplayConfig cold = off;
  cold.reload_before_invocation = false;
  double t_on = steady_latency(on, trace);
  double t_off = steady_latency(off, trace);
  double t_cold = steady_latency(cold, trace);
  double vs_off = 1 - t_on / t_off;
  double vs_cold = 1 - t_on / t_cold;
  bool ok = vs_off >= 0.40 && vs_cold >= 0.55;
  return {ok, fmt("per invocation: prewarm %.0f ms", t_on) + fmt(", warm no-prewarm %.0f ms", t_off) +
                  fmt(", cold %.0f ms", t_cold) +
                  fmt("; %.1f%% better than warm (need >=40)", 100 * vs_off) +
                  fmt(", %.1f%% better than cold (need >=55)", 100 * vs_cold)};
}

// ---------------------------------------------------------------------------
// 6. Eviction order vs brute-force tier ranking.

Outcome eviction_oracle() {
  MemoryStorage storage;
  LocalTransport transport;
  MembershipService membership;
  membership.update([](const MembershipView& v) { return add_cachelet(v, CacheletId{"c0"}); });
  SimClock clock;
  std::mt19937_64 rng(606);
  int mismatches = 0;
  int runs = 0;
  for (int trial = 0; trial < 10'000; ++trial) {
    bool size_policy = trial % 2 == 1;
    CacheletConfig cfg;
    cfg.capacity = 10 * 64 * kKB;
    cfg.policy = size_policy ? EvictionPolicy::size_threshold() : EvictionPolicy::lru();
    Cachelet c(CacheletId{"c0"}, cfg, storage, transport, membership, clock, 1);
    auto cs = testing::random_cache(rng, 10);
    std::sort(cs.begin(), cs.end(), [](auto& a, auto& b) { return a.recency < b.recency; });
    for (const auto& e : cs) {
      c.install({e.key, VersionToken::from_hex("01000000000000000000000000000000"),
                 Blob::pattern(e.recency, e.size)},
                e.owned);
    }
    // Shuffle recency with a few re-installs of random entries.
    for (int t = 0; t < 3 && !cs.empty(); ++t) {
      const auto& e = cs[rng() % cs.size()];
      c.install({e.key, VersionToken::from_hex("01000000000000000000000000000000"),
                 Blob::pattern(e.recency, e.size)},
                e.owned);
    }
    auto view = c.eviction_candidates();
    std::uint64_t need = c.used_bytes() == 0 ? 0 : rng() % (c.used_bytes() + 1);
    bool ok = false;
    auto idx = testing::oracle_victims(view, need, size_policy, 12 * kKB, ok);
    std::vector<ObjectKey> want;
    for (auto i : idx) want.push_back(view[i].key);
    ++runs;
    if (c.evict(need) != want) ++mismatches;
  }
  return {mismatches == 0,
          std::to_string(mismatches) + " mismatches in " + std::to_string(runs) + " caches"};
}

// ---------------------------------------------------------------------------
// 7. Memory daemon with heap growth to 96%.

Outcome memory_daemon() {
  const std::uint64_t total = 1000 * kMB;
  CacheletConfig cfg;
  cfg.capacity = total;
  TestCluster cl(1, cfg);
  MemoryDaemon daemon(cl[0], total);
  bool invariant = true;
  auto check = [&] {
    auto b = daemon.budget();
    invariant &= b.heap_used + b.cache_used <= b.total_capacity;
  };
  // Cache a few data frames while the heap is small.
  std::vector<ObjectKey> frames;
  for (int i = 0; i < 4; ++i) {
    auto key = cl.key_owned_by(0, "frame" + std::to_string(i));
    cl.seed(key, Blob::pattern(i, 150 * kMB));
    frames.push_back(key);
  }
  invariant &= daemon.allocate_heap(200 * kMB);
  for (const auto& f : frames) {
    cl.clock.advance_by(Millis(1000));
    Charge c;
    cl[0].read(f, c);
    check();
  }
  auto before = cl[0].used_bytes();
  // Heap grows step by step to 96% of capacity.
  bool all_succeeded = true;
  for (std::uint64_t heap = 300 * kMB; heap <= 960 * kMB; heap += 95 * kMB) {
    cl.clock.advance_by(Millis(1000));
    all_succeeded &= daemon.allocate_heap(heap - daemon.budget().heap_used);
    daemon.enforce();
    check();
  }
  if (daemon.budget().heap_used < 960 * kMB) {
    all_succeeded &= daemon.allocate_heap(960 * kMB - daemon.budget().heap_used);
    check();
  }
  auto b = daemon.budget();
  bool evicted = cl[0].used_bytes() < before;
  bool ok = invariant && all_succeeded && evicted && b.heap_used == 960 * kMB;
  return {ok, fmt("heap %.0f MB of 1000", b.heap_used / 1e6) +
                  fmt(", cache %.0f MB", b.cache_used / 1e6) + fmt(" (was %.0f MB)", before / 1e6) +
                  "; allocations succeeded=" + (all_succeeded ? "yes" : "no") +
                  ", invariant held=" + (invariant ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 8. At most one remote hit per (cachelet, key) between resets, plus
//    linearizability of small histories under storage-sync-storage.

std::vector<TraceEvent> busy_trace(std::mt19937_64& rng) {
  std::vector<TraceEvent> trace;
  std::vector<std::uint64_t> sizes(24);
  for (auto& s : sizes) s = 1000 + rng() % (3 * kMB);
  Millis t{0};
  for (int i = 0; i < 160; ++i) {
    t += Millis(static_cast<double>(rng() % 2500));
    if (rng() % 40 == 0) t += Millis(15 * 60'000.0);  // occasional unload
    std::string func = "f" + std::to_string(rng() % 3);
    trace.push_back({t, "app", func, TraceOp::kInvoke, std::nullopt, 0, 0});
    int ops = 1 + static_cast<int>(rng() % 4);
    for (int o = 0; o < ops; ++o) {
      auto k = rng() % sizes.size();
      ObjectKey key("d", "k" + std::to_string(k));
      auto op = rng() % 5 == 0 ? TraceOp::kWrite : TraceOp::kRead;
      trace.push_back({t, "app", func, op, key, sizes[k], 0});
    }
  }
  return trace;
}

struct RhCheck {
  std::uint64_t violations = 0;
  std::uint64_t remote_hits = 0;
  std::size_t instances = 0;
};

RhCheck check_remote_hits(const std::vector<AccessRecord>& log) {
  struct State {
    std::string version;
    int rh = 0;
  };
  RhCheck out;
  std::map<std::pair<std::string, ObjectKey>, State> state;
  std::set<std::string> instances;
  for (const auto& a : log) {
    instances.insert(a.instance);
    auto& s = state[{a.instance, a.key}];
    if (a.op == "evict" || a.op == "too-large") {
      s = {};
      continue;
    }
    if (a.version != s.version) s = {a.version, 0};
    if (a.op == "write") {
      s.rh = 0;
      continue;
    }
    if (a.access_class == "RH") {
      ++out.remote_hits;
      if (++s.rh > 1) ++out.violations;
    }
  }
  out.instances = instances.size();
  return out;
}

struct Op {
  int node;
  bool write;
  std::string value;  // written, or read back
  std::chrono::steady_clock::time_point begin, end;
};

/// Brute force: some order that respects real time makes every read return
/// the latest preceding write.
bool linearizable(const std::vector<Op>& ops, const std::string& initial) {
  std::vector<bool> used(ops.size(), false);
  std::function<bool(std::size_t, const std::string&)> dfs = [&](std::size_t placed,
                                                                 const std::string& value) {
    if (placed == ops.size()) return true;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (used[i]) continue;
      bool blocked = false;
      for (std::size_t j = 0; j < ops.size(); ++j) {
        if (!used[j] && j != i && ops[j].end < ops[i].begin) blocked = true;
      }
      if (blocked) continue;
      if (!ops[i].write && ops[i].value != value) continue;
      used[i] = true;
      if (dfs(placed + 1, ops[i].write ? ops[i].value : value)) return true;
      used[i] = false;
    }
    return false;
  };
  return dfs(0, initial);
}

Outcome remote_hits_and_linearizability() {
  // Part 1: replay logs.
  std::mt19937_64 rng(808);
  RhCheck total;
  std::size_t max_instances = 0;
  for (int trial = 0; trial < 12; ++trial) {
    ReplayConfig cfg;
    cfg.mode = ConsistencyMode::all()[static_cast<std::size_t>(trial) % 6];
    cfg.cache_capacity = 6 * kMB;
    cfg.default_exec = Millis(25'000);  // long runs keep invocations queued
    auto r = replay(busy_trace(rng), cfg, static_cast<std::uint64_t>(trial));
    auto c = check_remote_hits(r.accesses);
    total.violations += c.violations;
    total.remote_hits += c.remote_hits;
    max_instances = std::max(max_instances, c.instances);
  }

  // Part 2: every sequential history of up to 6 operations on one key
  // across three cachelets (each op a read or a write at some node).
  CacheletConfig sss;
  sss.mode = ConsistencyMode::storage_sync_storage();
  MembershipView view;
  for (int i = 0; i < 3; ++i) view = add_cachelet(view, CacheletId{"c" + std::to_string(i)});
  ObjectKey key("reg", "x");
  std::uint64_t histories = 0;
  std::uint64_t bad = 0;
  for (int len = 1; len <= 6; ++len) {
    int combos = 1;
    for (int i = 0; i < len; ++i) combos *= 6;
    for (int code = 0; code < combos; ++code) {
      MemoryStorage storage;
      LocalTransport transport;
      MembershipService membership;
      membership.update([&](const MembershipView&) { return view; });
      SimClock clock;
      std::vector<std::unique_ptr<Cachelet>> nodes;
      for (int i = 0; i < 3; ++i) {
        CacheletId id{"c" + std::to_string(i)};
        nodes.push_back(std::make_unique<Cachelet>(id, sss, storage, transport, membership, clock,
                                                   static_cast<std::uint64_t>(i + 1)));
        transport.attach(id, *nodes.back());
      }
      Charge ch;
      storage.put(key, Blob::from_string("init"), ch);
      std::vector<Op> ops;
      int c = code;
      for (int i = 0; i < len; ++i, c /= 6) {
        Op op{(c % 6) / 2, c % 2 == 1, "", {}, {}};
        op.begin = std::chrono::steady_clock::now();
        if (op.write) {
          op.value = "w" + std::to_string(i);
          nodes[static_cast<std::size_t>(op.node)]->write(key, Blob::from_string(op.value), ch);
        } else {
          op.value = nodes[static_cast<std::size_t>(op.node)]->read(key, ch).object.bytes.to_string();
        }
        op.end = std::chrono::steady_clock::now();
        ops.push_back(op);
      }
      ++histories;
      if (!linearizable(ops, "init")) {
        if (bad == 0 && std::getenv("FAAST_DEBUG")) {
          for (auto& o : ops) std::fprintf(stderr, "seq node %d %s %s\n", o.node, o.write ? "W" : "R", o.value.c_str());
        }
        ++bad;
      }
    }
  }

  // Part 3: concurrent histories from three threads over the same cluster.
  std::uint64_t concurrent = 0;
  for (int trial = 0; trial < 300; ++trial) {
    TestCluster cl(3, sss);
    Charge ch;
    cl.seed(key, Blob::from_string("init"));
    std::vector<std::vector<Op>> per_thread(3);
    std::vector<std::thread> threads;
    std::uint64_t seed = rng();
    for (int t = 0; t < 3; ++t) {
      threads.emplace_back([&, t] {
        std::mt19937_64 local(seed + static_cast<std::uint64_t>(t));
        for (int i = 0; i < 2; ++i) {
          Op op{t, local() % 2 == 0, "", {}, {}};
          Charge c;
          op.begin = std::chrono::steady_clock::now();
          if (op.write) {
            op.value = "t" + std::to_string(t) + "-" + std::to_string(i);
            cl[static_cast<std::size_t>(t)].write(key, Blob::from_string(op.value), c);
          } else {
            op.value = cl[static_cast<std::size_t>(t)].read(key, c).object.bytes.to_string();
          }
          op.end = std::chrono::steady_clock::now();
          per_thread[static_cast<std::size_t>(t)].push_back(op);
        }
      });
    }
    for (auto& t : threads) t.join();
    std::vector<Op> ops;
    for (auto& v : per_thread) ops.insert(ops.end(), v.begin(), v.end());
    ++concurrent;
    if (!linearizable(ops, "init")) {
      if (std::getenv("FAAST_DEBUG")) {
        for (auto& o : ops) std::fprintf(stderr, "conc node %d %s %s\n", o.node, o.write ? "W" : "R", o.value.c_str());
      }
      ++bad;
    }
  }

  bool ok = total.violations == 0 && total.remote_hits > 0 && max_instances > 1 && bad == 0;
  std::ostringstream d;
  d << total.remote_hits << " remote hits over 12 replays (up to " << max_instances
    << " instances), " << total.violations << " repeats; " << histories
    << " sequential and " << concurrent << " concurrent histories, " << bad
    << " not linearizable";
  return {ok, d.str()};
}

// ---------------------------------------------------------------------------
// 9. Determinism, through the CLI.

Outcome determinism() {
  auto dir = scratch_dir();
  auto trace = dir / "trace.csv";
  int status = 0;
  auto cli = std::string("\"") + FAAST_CLI + "\"";
  auto out = run_command(cli + " gen-trace --pattern mixed --seed 3 --invocations 60 --out \"" +
                             trace.string() + "\"",
                         status);
  if (status != 0) return {false, "gen-trace failed: " + out};
  std::vector<std::map<std::string, std::string>> runs;
  for (int i = 0; i < 2; ++i) {
    auto out_dir = dir / ("run" + std::to_string(i));
    out = run_command(cli + " replay --trace \"" + trace.string() + "\" --out \"" +
                          out_dir.string() + "\" --seed 11 --accesses",
                      status);
    if (status != 0) return {false, "replay failed: " + out};
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(out_dir)) {
      files[e.path().filename().string()] = slurp(e.path());
    }
    runs.push_back(std::move(files));
  }
  std::uintmax_t bytes = 0;
  for (const auto& [name, content] : runs[0]) bytes += content.size();
  bool same = runs[0] == runs[1] && runs[0].contains("metrics.csv") && bytes > 0;
  fs::remove_all(dir);
  return {same, std::to_string(runs[0].size()) + " files, " + std::to_string(bytes) +
                    " bytes, identical=" + (same ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 10. Wire codec round trip.

Outcome wire_codec() {
  std::mt19937_64 rng(1010);
  int checked = 0;
  int failures = 0;
  auto check = [&](const WireMessage& m) {
    ++checked;
    try {
      if (!(decode(encode(m)) == m)) ++failures;
    } catch (const Error&) {
      ++failures;
    }
  };
  for (auto type : testing::kAllTypes) {
    for (bool response : {false, true}) {
      for (int i = 0; i < 1000; ++i) check(testing::random_message(rng, type, response));
      // Zero-length payload and maximum-length key.
      auto m = testing::random_message(rng, type, response, 0, 0);
      check(m);
      if (!response) {
        m.key = std::string(kMaxKeyBytes - 2, 'k') + "\xC3\xA9";
        check(m);
      }
    }
  }
  return {failures == 0, std::to_string(checked) + " messages, " + std::to_string(failures) +
                             " round-trip failures"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"counter consistency", counter_consistency},
      {"bandwidth scaling", bandwidth_scaling},
      {"choose_fanout oracle", fanout_oracle},
      {"consistent-hashing remap", hashing_remap},
      {"pre-warm benefit", prewarm_benefit},
      {"eviction oracle", eviction_oracle},
      {"memory daemon", memory_daemon},
      {"at most one remote hit; linearizability", remote_hits_and_linearizability},
      {"replay determinism", determinism},
      {"wire codec round trip", wire_codec},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", index, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
