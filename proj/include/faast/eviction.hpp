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

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "faast/types.hpp"

namespace faast {

struct EvictionPolicy {
  enum class Kind { kLruNonOwnedFirst, kSizeThresholdNonOwnedFirst };

  Kind kind = Kind::kLruNonOwnedFirst;
  std::uint64_t threshold = 12 * kKB;  // only used by the size policy

  static EvictionPolicy lru() { return {}; }
  static EvictionPolicy size_threshold(std::uint64_t threshold = 12 * kKB);
  static EvictionPolicy parse(std::string_view name, std::uint64_t threshold = 12 * kKB);
};

struct EvictionCandidate {
  ObjectKey key;
  std::uint64_t size = 0;
  bool owned = false;
  std::uint64_t recency = 0;  // larger = more recently used
};

/// Tier of a candidate; lower tiers go first, LRU within a tier.
///
///   LRU policy:  0 non-owned, 1 owned
///   size policy: 0 non-owned > threshold, 1 non-owned <= threshold,
///                2 owned > threshold,     3 owned <= threshold
int eviction_tier(const EvictionCandidate& c, const EvictionPolicy& policy);

/// Indices of `candidates` to evict, in eviction order, freeing at least
/// `need` bytes. Throws kCannotSatisfy when everything together is smaller.
std::vector<std::size_t> select_victims(std::span<const EvictionCandidate> candidates,
                                        std::uint64_t need, const EvictionPolicy& policy);

}  // namespace faast
