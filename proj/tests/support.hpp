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

// Generators and independent oracles shared by the unit tests and the
// acceptance suite. Nothing here calls the code it is used to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "faast/eviction.hpp"
#include "faast/wire.hpp"

namespace faast::testing {

// ---------------------------------------------------------------------------
// Wire messages

inline std::string random_utf8(std::mt19937_64& rng, std::size_t max_bytes) {
  static const char* const pieces[] = {"a", "Z", "0", "/", "-", "\xC3\xA9", "\xE2\x82\xAC",
                                       "\xF0\x9F\x98\x80", " ", "_"};
  std::string out;
  std::size_t target = max_bytes == 0 ? 0 : rng() % (max_bytes + 1);
  while (true) {
    const char* p = pieces[rng() % std::size(pieces)];
    if (out.size() + std::char_traits<char>::length(p) > target) break;
    out += p;
  }
  return out;
}

inline Blob random_payload(std::mt19937_64& rng, std::size_t max_bytes) {
  std::size_t n = rng() % (max_bytes + 1);
  if (rng() % 4 == 0) return Blob::pattern(rng(), n);
  std::vector<std::byte> bytes(n);
  for (auto& b : bytes) b = static_cast<std::byte>(rng());
  return Blob::adopt(std::move(bytes));
}

inline VersionToken random_version(std::mt19937_64& rng) {
  VersionToken v;
  for (auto& b : v.bytes) b = static_cast<std::uint8_t>(rng());
  return v;
}

/// A message with exactly the fields its type and direction carry.
inline WireMessage random_message(std::mt19937_64& rng, MessageType type, bool response,
                                  std::size_t max_key = 64, std::size_t max_payload = 2048) {
  WireMessage m;
  m.type = type;
  m.response = response;
  if (response) {
    m.status = static_cast<WireStatus>(rng() % 5);
    switch (type) {
      case MessageType::kGet:
      case MessageType::kRangeGet:
        m.version = random_version(rng);
        m.payload = random_payload(rng, max_payload);
        break;
      case MessageType::kGetVersion:
      case MessageType::kPut:
        m.version = random_version(rng);
        break;
      case MessageType::kHeartbeat:
        break;
    }
    return m;
  }
  m.key = random_utf8(rng, max_key);
  if (type == MessageType::kPut) {
    m.version = random_version(rng);
    m.payload = random_payload(rng, max_payload);
  } else if (type == MessageType::kRangeGet) {
    m.offset = rng();
    m.length = rng();
  }
  return m;
}

inline constexpr MessageType kAllTypes[] = {MessageType::kGet, MessageType::kGetVersion,
                                            MessageType::kPut, MessageType::kRangeGet,
                                            MessageType::kHeartbeat};

// ---------------------------------------------------------------------------
// Eviction: repeatedly pick the best remaining victim by linear scan.

inline int oracle_rank(const EvictionCandidate& c, bool size_policy, std::uint64_t threshold) {
  if (!size_policy) return c.owned ? 1 : 0;
  bool big = c.size > threshold;
  if (!c.owned && big) return 0;
  if (!c.owned) return 1;
  if (big) return 2;
  return 3;
}

/// Returns the victim indices, or nullopt-like empty vector with `ok`
/// false when the request cannot be satisfied.
inline std::vector<std::size_t> oracle_victims(const std::vector<EvictionCandidate>& cs,
                                               std::uint64_t need, bool size_policy,
                                               std::uint64_t threshold, bool& ok) {
  std::uint64_t total = 0;
  for (const auto& c : cs) total += c.size;
  ok = total >= need;
  std::vector<std::size_t> out;
  if (!ok) return out;
  std::vector<bool> taken(cs.size(), false);
  std::uint64_t freed = 0;
  while (freed < need) {
    std::size_t best = cs.size();
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (taken[i]) continue;
      if (best == cs.size()) {
        best = i;
        continue;
      }
      int ri = oracle_rank(cs[i], size_policy, threshold);
      int rb = oracle_rank(cs[best], size_policy, threshold);
      if (ri < rb || (ri == rb && cs[i].recency < cs[best].recency)) best = i;
    }
    taken[best] = true;
    freed += cs[best].size;
    out.push_back(best);
  }
  return out;
}

/// Caches of up to `max_entries` with distinct recency stamps.
inline std::vector<EvictionCandidate> random_cache(std::mt19937_64& rng, std::size_t max_entries) {
  std::size_t n = rng() % (max_entries + 1);
  std::vector<std::uint64_t> stamps(n);
  for (std::size_t i = 0; i < n; ++i) stamps[i] = i + 1;
  std::shuffle(stamps.begin(), stamps.end(), rng);
  std::vector<EvictionCandidate> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t size = rng() % 3 == 0 ? 1 + rng() % (12 * kKB) : 1 + rng() % (64 * kKB);
    if (rng() % 10 == 0) size = 12 * kKB;  // exactly at the threshold
    out.push_back({ObjectKey("o", std::to_string(i)), size, rng() % 2 == 0, stamps[i]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Retrieval time, re-derived in seconds.

inline double oracle_t_dr_seconds(double bytes, int n, double t_load_s, double bw_bs,
                                  double bw_inst, bool loaded) {
  double mb = bytes / 1e6;
  double load = (loaded || n == 1) ? 0.0 : t_load_s;
  return load + (mb / n) / bw_bs + (mb - mb / n) / bw_inst;
}

/// Tabulates t_dr for N = 1..32 and applies the stopping rule.
inline int oracle_fanout(double bytes, double t_load_s, double bw_bs, double bw_inst, int current,
                         bool loaded) {
  double table[34];
  for (int n = 1; n <= 33; ++n) table[n] = oracle_t_dr_seconds(bytes, n, t_load_s, bw_bs, bw_inst, loaded);
  int n = std::max(1, current);
  for (; n < 32; ++n) {
    double gain = table[n] - table[n + 1];
    if (gain < 0 || gain / table[n] < 0.1 - 1e-9) return n;
  }
  return n;
}

}  // namespace faast::testing
