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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "faast/cachelet.hpp"

namespace faast {

// ---------------------------------------------------------------------------
// Memory daemon

struct MemoryBudget {
  std::uint64_t total_capacity = 0;
  std::uint64_t heap_used = 0;
  std::uint64_t cache_used = 0;
  double watermark_fraction = 0.10;

  /// Highest heap + cache usage that keeps the headroom intact.
  std::uint64_t limit() const;
  bool over_watermark() const { return heap_used + cache_used > limit(); }
  bool fits() const { return heap_used + cache_used <= total_capacity; }
  void validate() const;
};

struct WatermarkResult {
  std::uint64_t evicted_bytes = 0;
  std::vector<ObjectKey> evicted;
  bool over_watermark = false;  // still over after evicting everything evictable
};

/// Evicts cached objects until heap + cache is back under the watermark or
/// the cache is empty. Heap is never touched. Refreshes budget.cache_used.
WatermarkResult enforce_watermark(MemoryBudget& budget, Cachelet& cachelet,
                                  const EvictionPolicy& policy);

/// Tracks one instance's heap next to its cachelet. The cache capacity is
/// pinned to whatever the heap leaves under the watermark, so cache inserts
/// can never push the instance past its memory.
class MemoryDaemon {
 public:
  MemoryDaemon(Cachelet& cachelet, std::uint64_t total_capacity, double watermark_fraction = 0.10);

  /// Grows the heap, evicting cache first. Returns false (heap unchanged)
  /// when the request cannot fit even with an empty cache.
  bool allocate_heap(std::uint64_t bytes);
  void free_heap(std::uint64_t bytes);
  WatermarkResult enforce();

  MemoryBudget budget() const;

 private:
  void resize_cache();

  Cachelet& cachelet_;
  MemoryBudget budget_;
};

// ---------------------------------------------------------------------------
// Access metadata and pre-warm

struct KeyMetadata {
  ObjectKey key;
  std::uint64_t size = 0;
  VersionToken version;
  std::array<std::uint64_t, kAccessClassCount> counts{};
  std::uint64_t produced = 0;
  double mean_iat_ms = 0;

  std::uint64_t hits() const { return counts[0] + counts[1]; }
  std::uint64_t accesses() const;
};

struct AccessMetadata {
  CacheletId cachelet;
  Millis stamp{0};
  std::vector<KeyMetadata> keys;  // ordered by key
};

/// Reserved storage key for a snapshot: `__faast/meta/<cachelet>/<stamp>`.
ObjectKey metadata_key(const CacheletId& cachelet, Millis stamp);

std::string serialize_metadata(const AccessMetadata& metadata);
AccessMetadata parse_metadata(std::string_view text, CacheletId cachelet, Millis stamp);

/// Collects per-key metadata and writes it to the cachelet's storage. The
/// write is charged to `charge`, which callers keep off the request path.
AccessMetadata snapshot_on_unload(Cachelet& cachelet, Millis now, Charge& charge);

struct PrewarmConfig {
  double hit_rate_threshold = 0.5;
  /// Number of most recent unload epochs to merge; 0 picks the epochs
  /// inside twice the predicted inter-invocation period (at least two).
  std::size_t merge_window = 0;

  void validate() const;
};

/// Snapshots that fall into the merge window ending at `now`.
std::vector<AccessMetadata> merge_window(std::span<const AccessMetadata> snapshots,
                                         const PrewarmConfig& config, Millis now,
                                         std::optional<Millis> predicted_period);

struct PrewarmCandidate {
  ObjectKey key;
  std::uint64_t size = 0;
  double hit_rate = 0;
  std::uint64_t accesses = 0;
};

/// Merges the snapshots and returns the selected keys in fetch order:
/// descending hit rate, then more accesses, then key.
std::vector<PrewarmCandidate> select_prewarm(std::span<const AccessMetadata> snapshots,
                                             const PrewarmConfig& config);

struct PrewarmResult {
  std::size_t loaded = 0;
  std::uint64_t bytes = 0;
  bool aborted = false;
  Millis finished_at{0};
};

/// Loads the candidates this cachelet owns, in order, into free capacity.
/// Stops before any fetch that would still be running at `deadline` (the
/// next invocation), so pre-warm never overlaps execution.
PrewarmResult prewarm(Cachelet& cachelet, std::span<const PrewarmCandidate> candidates,
                      Millis now, std::optional<Millis> deadline = std::nullopt);

}  // namespace faast
