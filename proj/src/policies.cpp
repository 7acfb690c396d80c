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

#include "faast/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "faast/error.hpp"

namespace faast {

std::uint64_t MemoryBudget::limit() const {
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(total_capacity) *
                                               (1.0 - watermark_fraction)));
}

void MemoryBudget::validate() const {
  if (total_capacity == 0) throw Error(Errc::kInvalidArgument, "memory capacity must be positive");
  if (!(watermark_fraction >= 0 && watermark_fraction < 1)) {
    throw Error(Errc::kInvalidArgument, "watermark fraction must be in [0, 1)");
  }
}

WatermarkResult enforce_watermark(MemoryBudget& budget, Cachelet& cachelet,
                                  const EvictionPolicy& policy) {
  WatermarkResult result;
  budget.cache_used = cachelet.used_bytes();
  if (budget.over_watermark()) {
    std::uint64_t need = budget.heap_used + budget.cache_used - budget.limit();
    need = std::min(need, budget.cache_used);
    if (need > 0) {
      auto before = budget.cache_used;
      result.evicted = cachelet.evict(need, policy);
      budget.cache_used = cachelet.used_bytes();
      result.evicted_bytes = before - budget.cache_used;
    }
  }
  result.over_watermark = budget.over_watermark();
  return result;
}

MemoryDaemon::MemoryDaemon(Cachelet& cachelet, std::uint64_t total_capacity,
                           double watermark_fraction)
    : cachelet_(cachelet) {
  budget_.total_capacity = total_capacity;
  budget_.watermark_fraction = watermark_fraction;
  budget_.validate();
  resize_cache();
}

void MemoryDaemon::resize_cache() {
  auto limit = budget_.limit();
  cachelet_.set_capacity(limit > budget_.heap_used ? limit - budget_.heap_used : 0);
  budget_.cache_used = cachelet_.used_bytes();
}

bool MemoryDaemon::allocate_heap(std::uint64_t bytes) {
  if (budget_.heap_used + bytes > budget_.total_capacity) return false;
  budget_.heap_used += bytes;
  resize_cache();
  return budget_.fits();
}

void MemoryDaemon::free_heap(std::uint64_t bytes) {
  budget_.heap_used -= std::min(bytes, budget_.heap_used);
  resize_cache();
}

WatermarkResult MemoryDaemon::enforce() {
  return enforce_watermark(budget_, cachelet_, cachelet_.config().policy);
}

MemoryBudget MemoryDaemon::budget() const {
  MemoryBudget b = budget_;
  b.cache_used = cachelet_.used_bytes();
  return b;
}

// ---------------------------------------------------------------------------

std::uint64_t KeyMetadata::accesses() const {
  std::uint64_t n = produced;
  for (auto c : counts) n += c;
  return n;
}

ObjectKey metadata_key(const CacheletId& cachelet, Millis stamp) {
  return ObjectKey("__faast", "meta/" + cachelet.value + "/" +
                                  std::to_string(std::llround(stamp.count())));
}

std::string serialize_metadata(const AccessMetadata& metadata) {
  std::ostringstream out;
  char iat[64];
  for (const auto& k : metadata.keys) {
    std::snprintf(iat, sizeof(iat), "%.3f", k.mean_iat_ms);
    out << k.key.path() << '\t' << k.size << '\t' << k.version.hex() << '\t' << k.counts[0]
        << ',' << k.counts[1] << ',' << k.counts[2] << ',' << k.counts[3] << ',' << k.produced
        << '\t' << iat << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

template <typename T>
T parse_number(std::string_view text, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(Errc::kInvalidArgument, "metadata line " + std::to_string(line) +
                                            ": bad number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

AccessMetadata parse_metadata(std::string_view text, CacheletId cachelet, Millis stamp) {
  AccessMetadata metadata{std::move(cachelet), stamp, {}};
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 5) {
      throw Error(Errc::kInvalidArgument,
                  "metadata line " + std::to_string(line_no) + ": expected 5 fields");
    }
    KeyMetadata k;
    k.key = ObjectKey::parse(fields[0]);
    k.size = parse_number<std::uint64_t>(fields[1], line_no);
    k.version = VersionToken::from_hex(fields[2]);
    auto counts = split(fields[3], ',');
    if (counts.size() != 5) {
      throw Error(Errc::kInvalidArgument,
                  "metadata line " + std::to_string(line_no) + ": expected 5 counts");
    }
    for (std::size_t i = 0; i < 4; ++i) k.counts[i] = parse_number<std::uint64_t>(counts[i], line_no);
    k.produced = parse_number<std::uint64_t>(counts[4], line_no);
    k.mean_iat_ms = parse_number<double>(fields[4], line_no);
    metadata.keys.push_back(std::move(k));
  }
  return metadata;
}

AccessMetadata snapshot_on_unload(Cachelet& cachelet, Millis now, Charge& charge) {
  AccessMetadata metadata{cachelet.id(), now, {}};
  for (const auto& e : cachelet.entries()) {
    KeyMetadata k;
    k.key = e.object.key;
    k.size = e.object.size();
    k.version = e.object.version;
    k.counts = e.access_counts;
    k.produced = e.produced;
    k.mean_iat_ms = e.mean_inter_arrival().count();
    metadata.keys.push_back(std::move(k));
  }
  cachelet.storage().put(metadata_key(cachelet.id(), now),
                         Blob::from_string(serialize_metadata(metadata)), charge);
  return metadata;
}

void PrewarmConfig::validate() const {
  if (!(hit_rate_threshold > 0 && hit_rate_threshold <= 1)) {
    throw Error(Errc::kInvalidArgument, "hit rate threshold must be in (0, 1]");
  }
}

std::vector<AccessMetadata> merge_window(std::span<const AccessMetadata> snapshots,
                                         const PrewarmConfig& config, Millis now,
                                         std::optional<Millis> predicted_period) {
  std::set<Millis, std::greater<>> stamps;
  for (const auto& s : snapshots) {
    if (s.stamp <= now) stamps.insert(s.stamp);
  }
  std::set<Millis> keep;
  std::size_t taken = 0;
  for (auto stamp : stamps) {
    bool in_window;
    if (config.merge_window > 0) {
      in_window = taken < config.merge_window;
    } else {
      in_window = taken < 2 ||
                  (predicted_period && now - stamp <= 2.0 * *predicted_period);
    }
    if (!in_window) break;
    keep.insert(stamp);
    ++taken;
  }
  std::vector<AccessMetadata> out;
  for (const auto& s : snapshots) {
    if (keep.contains(s.stamp)) out.push_back(s);
  }
  return out;
}

std::vector<PrewarmCandidate> select_prewarm(std::span<const AccessMetadata> snapshots,
                                             const PrewarmConfig& config) {
  struct Merged {
    std::uint64_t hits = 0;
    std::uint64_t accesses = 0;
    std::uint64_t size = 0;
    Millis latest{-1};
  };
  std::map<ObjectKey, Merged> merged;
  for (const auto& snapshot : snapshots) {
    for (const auto& k : snapshot.keys) {
      auto& m = merged[k.key];
      m.hits += k.hits();
      m.accesses += k.accesses();
      if (snapshot.stamp >= m.latest) {
        m.latest = snapshot.stamp;
        m.size = k.size;
      }
    }
  }
  std::vector<PrewarmCandidate> out;
  for (const auto& [key, m] : merged) {
    if (m.accesses == 0) continue;
    double hit_rate = static_cast<double>(m.hits) / static_cast<double>(m.accesses);
    if (hit_rate > config.hit_rate_threshold || m.accesses >= 2) {
      out.push_back({key, m.size, hit_rate, m.accesses});
    }
  }
  std::sort(out.begin(), out.end(), [](const PrewarmCandidate& a, const PrewarmCandidate& b) {
    if (a.hit_rate != b.hit_rate) return a.hit_rate > b.hit_rate;
    if (a.accesses != b.accesses) return a.accesses > b.accesses;
    return a.key < b.key;
  });
  return out;
}

PrewarmResult prewarm(Cachelet& cachelet, std::span<const PrewarmCandidate> candidates,
                      Millis now, std::optional<Millis> deadline) {
  PrewarmResult result;
  Millis t = now;
  auto& storage = cachelet.storage();
  for (const auto& candidate : candidates) {
    if (!cachelet.owns(candidate.key) || cachelet.contains(candidate.key)) continue;
    if (!storage.exists(candidate.key)) continue;
    if (candidate.size > cachelet.free_bytes()) continue;
    if (deadline && t + storage.model().read_cost(candidate.size) > *deadline) {
      result.aborted = true;
      break;
    }
    Charge charge;
    VersionedObject object;
    try {
      object = storage.get(candidate.key, charge);
    } catch (const Error&) {
      continue;
    }
    t += charge.total();
    if (cachelet.install(std::move(object), true)) {
      ++result.loaded;
      result.bytes += candidate.size;
    }
  }
  result.finished_at = t;
  return result;
}

}  // namespace faast
