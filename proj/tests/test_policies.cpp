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

#include <doctest.h>

#include <random>
#include <set>

#include "cluster.hpp"
#include "faast/error.hpp"
#include "faast/policies.hpp"
#include "support.hpp"

using namespace faast;
using faast::testing::TestCluster;

namespace {

std::vector<ObjectKey> keys_at(const std::vector<EvictionCandidate>& cs,
                               const std::vector<std::size_t>& idx) {
  std::vector<ObjectKey> out;
  for (auto i : idx) out.push_back(cs[i].key);
  return out;
}

CacheletConfig small_cache(std::uint64_t capacity, EvictionPolicy policy = {}) {
  CacheletConfig c;
  c.capacity = capacity;
  c.mode = ConsistencyMode::owner_sync_owner();
  c.policy = policy;
  return c;
}

KeyMetadata key_meta(const std::string& name, std::array<std::uint64_t, 4> counts,
                     std::uint64_t produced = 0) {
  KeyMetadata k;
  k.key = ObjectKey("app", name);
  k.size = 100;
  k.counts = counts;
  k.produced = produced;
  return k;
}

std::set<ObjectKey> selected(std::span<const AccessMetadata> snaps, const PrewarmConfig& cfg) {
  std::set<ObjectKey> out;
  for (const auto& c : select_prewarm(snaps, cfg)) out.insert(c.key);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Eviction

TEST_CASE("eviction examples") {
  auto lru = EvictionPolicy::lru();
  CHECK(select_victims({}, 0, lru).empty());

  std::vector<EvictionCandidate> cs = {
      {ObjectKey("x", "A"), 10, false, 5},
      {ObjectKey("x", "B"), 10, true, 1},
  };
  CHECK(keys_at(cs, select_victims(cs, 10, lru)) == std::vector{ObjectKey("x", "A")});

  auto size = EvictionPolicy::size_threshold(12 * kKB);
  std::vector<EvictionCandidate> mixed = {
      {ObjectKey("x", "small"), 1 * kKB, false, 1},
      {ObjectKey("x", "owned"), 20 * kKB, true, 2},
      {ObjectKey("x", "big"), 20 * kKB, false, 3},
  };
  CHECK(keys_at(mixed, select_victims(mixed, 21 * kKB, size)) ==
        std::vector{ObjectKey("x", "big"), ObjectKey("x", "small")});

  try {
    select_victims(mixed, 42 * kKB, size);
    FAIL("expected kCannotSatisfy");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kCannotSatisfy);
  }
}

TEST_CASE("policy names parse") {
  CHECK(EvictionPolicy::parse("lru").kind == EvictionPolicy::Kind::kLruNonOwnedFirst);
  auto p = EvictionPolicy::parse("size-threshold", 4096);
  CHECK(p.kind == EvictionPolicy::Kind::kSizeThresholdNonOwnedFirst);
  CHECK(p.threshold == 4096);
  CHECK_THROWS_AS(EvictionPolicy::parse("fifo"), Error);
  CHECK_THROWS_AS(EvictionPolicy::size_threshold(0), Error);
}

TEST_CASE("victim order matches the tier oracle on small caches") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 3000; ++trial) {
    auto cs = testing::random_cache(rng, 10);
    std::uint64_t total = 0;
    for (const auto& c : cs) total += c.size;
    std::uint64_t need = total == 0 ? 0 : rng() % (total + total / 4 + 1);
    bool size_policy = rng() % 2 == 0;
    auto policy = size_policy ? EvictionPolicy::size_threshold() : EvictionPolicy::lru();
    bool ok = false;
    auto expected = testing::oracle_victims(cs, need, size_policy, 12 * kKB, ok);
    if (!ok) {
      CHECK_THROWS_AS(select_victims(cs, need, policy), Error);
      continue;
    }
    CHECK(select_victims(cs, need, policy) == expected);
  }
}

TEST_CASE("cachelet eviction follows the same order") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    bool size_policy = trial % 2 == 0;
    auto policy = size_policy ? EvictionPolicy::size_threshold() : EvictionPolicy::lru();
    TestCluster cl(2, small_cache(10 * 64 * kKB, policy));
    auto cs = testing::random_cache(rng, 10);
    // Install in recency order so the cachelet's recency matches the stamps.
    std::sort(cs.begin(), cs.end(), [](auto& a, auto& b) { return a.recency < b.recency; });
    for (auto& c : cs) {
      c.key = c.owned ? cl.key_owned_by(0, c.key.name) : cl.key_owned_by(1, c.key.name);
      REQUIRE(cl[0].install({c.key, VersionToken::from_hex("0000000000000000000000000000000" +
                                                           std::string(1, "123456789"[trial % 9])),
                             Blob::pattern(1, c.size)},
                            c.owned));
    }
    auto got = cl[0].eviction_candidates();
    std::uint64_t need = cl[0].used_bytes() / 2;
    bool ok = false;
    auto expected = keys_at(got, testing::oracle_victims(got, need, size_policy, 12 * kKB, ok));
    REQUIRE(ok);
    CHECK(cl[0].evict(need) == expected);
  }
}

// ---------------------------------------------------------------------------
// Memory daemon

TEST_CASE("watermark examples") {
  TestCluster cl(1, small_cache(1000));
  auto key = cl.key_owned_by(0);
  cl[0].install({key, VersionToken::from_hex("01000000000000000000000000000000"),
                 Blob::pattern(1, 300)},
                true);

  MemoryBudget half{1000, 200, 0};
  auto r = enforce_watermark(half, cl[0], EvictionPolicy::lru());
  CHECK(r.evicted_bytes == 0);
  CHECK_FALSE(r.over_watermark);

  MemoryBudget tight{1000, 700, 0};
  r = enforce_watermark(tight, cl[0], EvictionPolicy::lru());
  CHECK(r.evicted_bytes == 300);
  CHECK(tight.heap_used + tight.cache_used <= 900);

  MemoryBudget empty{1000, 950, 0};
  r = enforce_watermark(empty, cl[0], EvictionPolicy::lru());
  CHECK(r.evicted_bytes == 0);
  CHECK(r.over_watermark);
}

TEST_CASE("heap growing to 96% evicts the cached frame and still succeeds") {
  TestCluster cl(1, small_cache(100 * kMB));
  MemoryDaemon daemon(cl[0], 100 * kMB);
  CHECK(cl[0].capacity() == 90 * kMB);
  REQUIRE(daemon.allocate_heap(50 * kMB));
  auto frame = cl.key_owned_by(0, "df");
  cl.seed(frame, Blob::pattern(4, 30 * kMB));
  Charge c;
  cl[0].read(frame, c);
  REQUIRE(cl[0].contains(frame));

  CHECK(daemon.allocate_heap(46 * kMB));
  CHECK_FALSE(cl[0].contains(frame));
  auto b = daemon.budget();
  CHECK(b.heap_used == 96 * kMB);
  CHECK(b.heap_used + b.cache_used <= b.total_capacity);

  CHECK_FALSE(daemon.allocate_heap(5 * kMB));
  CHECK(daemon.budget().heap_used == 96 * kMB);
  daemon.free_heap(56 * kMB);
  CHECK(cl[0].capacity() == 50 * kMB);
}

TEST_CASE("after enforcement usage is under the watermark when the cache allowed it") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const std::uint64_t total = 1'000'000;
    TestCluster cl(1, small_cache(total));
    std::uint64_t cached = 0;
    int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      auto size = 1 + rng() % 120'000;
      if (cached + size > total) break;
      cl[0].install({ObjectKey("w", std::to_string(i)),
                     VersionToken::from_hex("01000000000000000000000000000000"),
                     Blob::pattern(i, size)},
                    rng() % 2 == 0);
      cached += size;
    }
    MemoryBudget b{total, rng() % (total - cached + 1), 0};
    auto r = enforce_watermark(b, cl[0], EvictionPolicy::size_threshold());
    CHECK(b.cache_used == cl[0].used_bytes());
    CHECK(b.fits());
    if (b.heap_used <= b.limit()) {
      CHECK(b.heap_used + b.cache_used <= 900'000);
      CHECK_FALSE(r.over_watermark);
    } else {
      CHECK(b.cache_used == 0);
    }
  }
}

// ---------------------------------------------------------------------------
// Metadata

TEST_CASE("snapshot records per-key counts and inter-arrival") {
  TestCluster cl(2, small_cache(64 * kMB));
  auto key = cl.key_owned_by(1);
  auto v = cl.seed(key, Blob::from_string("model"));
  Charge c;
  CHECK(cl[0].read(key, c).access == AccessClass::kRemoteMiss);
  for (int i = 1; i <= 3; ++i) {
    cl.clock.advance_to(Millis(600'000.0 * i));
    CHECK(cl[0].read(key, c).access == AccessClass::kLocalHit);
  }
  Millis stamp{1'800'000};
  auto snap = snapshot_on_unload(cl[0], stamp, c);
  REQUIRE(snap.keys.size() == 1);
  const auto& k = snap.keys[0];
  CHECK(k.counts == std::array<std::uint64_t, 4>{3, 0, 0, 1});
  CHECK(k.version == v);
  CHECK(k.mean_iat_ms == doctest::Approx(600'000));
  CHECK(k.hits() == 3);

  auto stored = cl.storage.get(metadata_key(cl[0].id(), stamp), c);
  CHECK(stored.key.path() == "__faast/meta/c0/1800000");
  auto parsed = parse_metadata(stored.bytes.to_string(), cl[0].id(), stamp);
  CHECK(serialize_metadata(parsed) == serialize_metadata(snap));

  TestCluster fresh(1, small_cache(kMB));
  auto empty = snapshot_on_unload(fresh[0], Millis{5}, c);
  CHECK(empty.keys.empty());
  CHECK(empty.stamp == Millis{5});
}

TEST_CASE("metadata text round-trips") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    AccessMetadata m{CacheletId{"c3"}, Millis(123), {}};
    int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      KeyMetadata k;
      k.key = ObjectKey("ns" + std::to_string(i), testing::random_utf8(rng, 20) + "x");
      k.size = rng();
      k.version = testing::random_version(rng);
      for (auto& cnt : k.counts) cnt = rng() % 1000;
      k.produced = rng() % 10;
      k.mean_iat_ms = static_cast<double>(rng() % 10'000'000) / 1000.0;
      m.keys.push_back(k);
    }
    auto back = parse_metadata(serialize_metadata(m), m.cachelet, m.stamp);
    REQUIRE(back.keys.size() == m.keys.size());
    for (std::size_t i = 0; i < m.keys.size(); ++i) {
      CHECK(back.keys[i].key == m.keys[i].key);
      CHECK(back.keys[i].size == m.keys[i].size);
      CHECK(back.keys[i].version == m.keys[i].version);
      CHECK(back.keys[i].counts == m.keys[i].counts);
      CHECK(back.keys[i].produced == m.keys[i].produced);
      CHECK(back.keys[i].mean_iat_ms == doctest::Approx(m.keys[i].mean_iat_ms));
    }
  }
  CHECK_THROWS_AS(parse_metadata("a/b\t1\t00\n", CacheletId{"c"}, Millis{}), Error);
}

// ---------------------------------------------------------------------------
// Pre-warm selection

TEST_CASE("select_prewarm examples") {
  PrewarmConfig cfg;
  AccessMetadata one{CacheletId{"c0"}, Millis(1000), {}};
  one.keys = {key_meta("hot", {3, 1, 0, 1}), key_meta("once", {0, 0, 1, 0}),
              key_meta("model", {0, 0, 1, 0})};
  AccessMetadata two{CacheletId{"c1"}, Millis(2000), {}};
  two.keys = {key_meta("model", {0, 0, 0, 1})};
  AccessMetadata snaps[] = {one, two};
  auto got = select_prewarm(snaps, cfg);
  REQUIRE(got.size() == 2);
  CHECK(got[0].key.name == "hot");
  CHECK(got[0].hit_rate == doctest::Approx(0.8));
  CHECK(got[1].key.name == "model");
  CHECK(got[1].accesses == 2);
  CHECK(select_prewarm({}, cfg).empty());

  // A key written once and read back once counts as two accesses.
  AccessMetadata out{CacheletId{"c0"}, Millis(1), {key_meta("out", {1, 0, 0, 0}, 1)}};
  CHECK(select_prewarm(std::span(&out, 1), cfg).size() == 1);
}

TEST_CASE("select_prewarm is monotone in accesses") {
  std::mt19937_64 rng(15);
  PrewarmConfig cfg;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<AccessMetadata> snaps;
    int epochs = 1 + static_cast<int>(rng() % 3);
    for (int e = 0; e < epochs; ++e) {
      AccessMetadata m{CacheletId{"c0"}, Millis(e * 1000.0), {}};
      for (int k = 0; k < 5; ++k) {
        if (rng() % 2) continue;
        std::array<std::uint64_t, 4> counts{};
        for (auto& c : counts) c = rng() % 2;
        m.keys.push_back(key_meta("k" + std::to_string(k), counts, rng() % 2));
      }
      snaps.push_back(m);
    }
    auto before = selected(snaps, cfg);
    auto& victim = snaps[rng() % snaps.size()];
    if (victim.keys.empty()) continue;
    auto& k = victim.keys[rng() % victim.keys.size()];
    if (rng() % 5 == 0) {
      ++k.produced;
    } else {
      ++k.counts[rng() % 4];
    }
    auto after = selected(snaps, cfg);
    CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
  }
}

TEST_CASE("merge window picks recent epochs") {
  std::vector<AccessMetadata> snaps;
  for (int h = 1; h <= 4; ++h) snaps.push_back({CacheletId{"c0"}, Millis(h * 3'600'000.0), {}});
  Millis now(4 * 3'600'000.0);
  PrewarmConfig fixed;
  fixed.merge_window = 2;
  CHECK(merge_window(snaps, fixed, now, std::nullopt).size() == 2);
  PrewarmConfig autowin;
  CHECK(merge_window(snaps, autowin, now, std::nullopt).size() == 2);
  CHECK(merge_window(snaps, autowin, now, Millis(3'600'000)).size() == 3);
  CHECK(merge_window(snaps, autowin, now, Millis(1'000)).size() == 2);
  auto latest = merge_window(snaps, fixed, now, std::nullopt);
  CHECK(latest.back().stamp == now);
}

// ---------------------------------------------------------------------------
// Pre-warm loading

TEST_CASE("prewarm loads owned keys that fit") {
  TestCluster cl(2, small_cache(64 * kMB));
  std::vector<PrewarmCandidate> cands;
  for (const char* ns : {"a", "b", "c"}) {
    auto key = cl.key_owned_by(0, ns);
    cl.seed(key, Blob::pattern(ns[0], 9 * kMB));
    cands.push_back({key, 9 * kMB, 1.0, 4});
  }
  auto other = cl.key_owned_by(1, "d");
  cl.seed(other, Blob::pattern(9, 10));
  cands.push_back({other, 10, 1.0, 4});
  cands.push_back({cl.key_owned_by(0, "missing"), 10, 1.0, 4});

  CHECK(prewarm(cl[0], {}, Millis{0}).loaded == 0);
  auto r = prewarm(cl[0], cands, Millis{0});
  CHECK(r.loaded == 3);
  CHECK(r.bytes == 27 * kMB);
  CHECK(r.finished_at.count() == doctest::Approx(3 * 120.0));
  CHECK_FALSE(cl[1].contains(other));
  CHECK_FALSE(cl[0].contains(other));
  for (int i = 0; i < 3; ++i) {
    Charge c;
    CHECK(cl[0].read(cands[i].key, c).access == AccessClass::kLocalHit);
  }
}

TEST_CASE("prewarm stops before a fetch that would overlap the next invocation") {
  TestCluster cl(1, small_cache(64 * kMB));
  std::vector<PrewarmCandidate> cands;
  for (const char* ns : {"a", "b", "c"}) {
    auto key = cl.key_owned_by(0, ns);
    cl.seed(key, Blob::pattern(ns[0], 9 * kMB));
    cands.push_back({key, 9 * kMB, 1.0, 4});
  }
  auto r = prewarm(cl[0], cands, Millis{1000}, Millis{1000 + 250});
  CHECK(r.loaded == 2);
  CHECK(r.aborted);
  CHECK(r.finished_at <= Millis{1250});
}

TEST_CASE("prewarm skips candidates larger than free space") {
  TestCluster cl(1, small_cache(10 * kMB));
  auto big = cl.key_owned_by(0, "big");
  auto small = cl.key_owned_by(0, "small");
  cl.seed(big, Blob::pattern(1, 11 * kMB));
  cl.seed(small, Blob::pattern(2, kMB));
  PrewarmCandidate cands[] = {{big, 11 * kMB, 1.0, 2}, {small, kMB, 0.9, 2}};
  auto r = prewarm(cl[0], cands, Millis{0});
  CHECK(r.loaded == 1);
  CHECK(cl[0].contains(small));
}
