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

#include "faast/eviction.hpp"

#include <algorithm>
#include <numeric>

#include "faast/error.hpp"

namespace faast {

EvictionPolicy EvictionPolicy::size_threshold(std::uint64_t threshold) {
  if (threshold == 0) throw Error(Errc::kInvalidArgument, "size threshold must be positive");
  return {Kind::kSizeThresholdNonOwnedFirst, threshold};
}

EvictionPolicy EvictionPolicy::parse(std::string_view name, std::uint64_t threshold) {
  if (name == "lru") return lru();
  if (name == "size-threshold" || name == "size") return size_threshold(threshold);
  throw Error(Errc::kInvalidArgument, "unknown eviction policy '" + std::string(name) + "'");
}

int eviction_tier(const EvictionCandidate& c, const EvictionPolicy& policy) {
  int owned = c.owned ? 1 : 0;
  if (policy.kind == EvictionPolicy::Kind::kLruNonOwnedFirst) return owned;
  int small = c.size <= policy.threshold ? 1 : 0;
  return owned * 2 + small;
}

std::vector<std::size_t> select_victims(std::span<const EvictionCandidate> candidates,
                                        std::uint64_t need, const EvictionPolicy& policy) {
  if (need == 0) return {};
  std::uint64_t total = 0;
  for (const auto& c : candidates) total += c.size;
  if (total < need) {
    throw Error(Errc::kCannotSatisfy, "cache holds " + std::to_string(total) +
                                          " bytes, cannot free " + std::to_string(need));
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    int ta = eviction_tier(candidates[a], policy);
    int tb = eviction_tier(candidates[b], policy);
    if (ta != tb) return ta < tb;
    return candidates[a].recency < candidates[b].recency;
  });
  std::vector<std::size_t> victims;
  std::uint64_t freed = 0;
  for (auto i : order) {
    if (freed >= need) break;
    victims.push_back(i);
    freed += candidates[i].size;
  }
  return victims;
}

}  // namespace faast
