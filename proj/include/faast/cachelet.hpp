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
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "faast/eviction.hpp"
#include "faast/membership.hpp"
#include "faast/storage.hpp"
#include "faast/transport.hpp"
#include "faast/types.hpp"

namespace faast {

struct CacheletConfig {
  std::uint64_t capacity = 128 * kMB;
  ConsistencyMode mode = ConsistencyMode::storage_sync_storage();
  EvictionPolicy policy;
};

struct CacheEntry {
  VersionedObject object;
  bool owned = false;
  Millis last_access{0};
  std::uint64_t recency = 0;
  std::array<std::uint64_t, kAccessClassCount> access_counts{};
  std::uint64_t produced = 0;  // times written by this instance
  Millis first_touch{0};
  std::uint64_t touches = 0;   // reads + writes

  std::uint64_t count(AccessClass cls) const { return access_counts[static_cast<std::size_t>(cls)]; }
  Millis mean_inter_arrival() const;
};

struct ReadResult {
  VersionedObject object;
  AccessClass access;
};

enum class DropReason { kEvicted, kTooLarge };

/// One application instance's slice of the distributed cache.
///
/// Reads resolve through the local cache, the key's owner (by consistent
/// hashing) and remote storage, in that order. Writes go through the owner
/// unless the mode says local-only. Thread-safe; the cache lock is never
/// held across storage or transport calls.
class Cachelet final : public MessageHandler {
 public:
  using DropListener = std::function<void(const CacheletId&, const ObjectKey&, DropReason)>;

  Cachelet(CacheletId id, CacheletConfig config, Storage& storage, Transport& transport,
           const MembershipService& membership, const Clock& clock, std::uint64_t seed);

  const CacheletId& id() const noexcept { return id_; }
  const CacheletConfig& config() const noexcept { return config_; }
  const ConsistencyMode& mode() const noexcept { return config_.mode; }

  ReadResult read(const ObjectKey& key, Charge& charge);
  VersionToken write(const ObjectKey& key, Blob bytes, Charge& charge);
  /// Drains the async write queue in order. Returns the number of writes
  /// that reached storage; failures move to the dead-letter list.
  std::size_t flush_async(Charge& charge);

  WireMessage serve(const WireMessage& request, Charge& charge) override;

  /// Caches `object` without counting an access (pre-warm, parallel fetch).
  /// Returns false if it does not fit at all.
  bool install(VersionedObject object, bool owned);
  /// Records a read that was satisfied outside read(), e.g. by a parallel
  /// fetch, and caches the result.
  void record_external_read(VersionedObject object, AccessClass access);

  std::vector<ObjectKey> evict(std::uint64_t need, const EvictionPolicy& policy);
  std::vector<ObjectKey> evict(std::uint64_t need) { return evict(need, config_.policy); }

  bool contains(const ObjectKey& key) const;
  std::optional<CacheEntry> entry(const ObjectKey& key) const;
  /// Snapshot of every entry, ordered by key.
  std::vector<CacheEntry> entries() const;
  std::vector<EvictionCandidate> eviction_candidates() const;

  std::uint64_t used_bytes() const;
  std::uint64_t capacity() const;
  std::uint64_t free_bytes() const;
  /// Shrinks or grows the cache; shrinking evicts with the configured policy.
  void set_capacity(std::uint64_t capacity);

  /// Per-key eviction counts since the previous call; resets them.
  std::map<ObjectKey, std::uint64_t> take_eviction_counts();
  /// Cache accesses (reads and writes) since the previous call; resets it.
  std::uint64_t take_window_accesses();

  std::size_t pending_async() const;
  std::vector<VersionedObject> dead_letters() const;

  bool owns(const ObjectKey& key) const;
  std::shared_ptr<const MembershipView> view() const { return membership_.view(); }
  Storage& storage() noexcept { return storage_; }
  Transport& transport() noexcept { return transport_; }
  const Clock& clock() const noexcept { return clock_; }

  void set_drop_listener(DropListener listener);

 private:
  struct Dropped {
    ObjectKey key;
    DropReason reason;
  };

  std::optional<VersionedObject> cached(const ObjectKey& key) const;
  bool still_valid(const VersionedObject& object, const CacheletId& owner, bool self_owner,
                   Charge& charge);
  /// Caches what a read returned, unless a write to the key was applied
  /// here after `seen` was sampled; counts the access either way.
  void admit_read(const VersionedObject& object, bool owned, std::optional<AccessClass> access,
                  std::uint64_t seen);
  void admit_write(const VersionedObject& object, bool owned, bool produced);
  void touch_locked(CacheEntry& e, std::optional<AccessClass> access, bool produced);
  std::uint64_t write_seq(const ObjectKey& key) const;
  bool insert_locked(const VersionedObject& object, bool owned, std::vector<Dropped>& dropped);
  std::vector<ObjectKey> evict_locked(std::uint64_t need, const EvictionPolicy& policy,
                                      std::vector<Dropped>& dropped);
  void notify(const std::vector<Dropped>& dropped);
  VersionToken next_version();
  /// Reads `key` from storage and caches it. Owners do this under the
  /// write lock so a concurrent write is never overwritten by older bytes.
  VersionedObject fill_from_storage(const ObjectKey& key, bool owned,
                                    std::optional<AccessClass> access, std::uint64_t seen,
                                    Charge& charge);

  /// Applies a write at the owner: cache it, then persist per write mode.
  void owner_write(const VersionedObject& object, bool produced, Charge& charge);
  /// Storage half of a write: synchronous put or async enqueue.
  void persist(const VersionedObject& object, Charge& charge);

  WireMessage serve_get(const WireMessage& request, Charge& charge);
  WireMessage serve_get_version(const WireMessage& request, Charge& charge);
  WireMessage serve_put(const WireMessage& request, Charge& charge);
  WireMessage serve_range_get(const WireMessage& request, Charge& charge);

  CacheletId id_;
  CacheletConfig config_;
  Storage& storage_;
  Transport& transport_;
  const MembershipService& membership_;
  const Clock& clock_;

  mutable std::mutex mu_;
  std::map<ObjectKey, CacheEntry> entries_;
  std::uint64_t used_ = 0;
  std::uint64_t capacity_;
  std::uint64_t tick_ = 0;
  VersionSource versions_;
  std::map<ObjectKey, std::uint64_t> eviction_counts_;
  std::map<ObjectKey, std::uint64_t> write_seqs_;  // writes applied here, per key
  std::uint64_t window_accesses_ = 0;
  std::deque<VersionedObject> pending_;
  std::vector<VersionedObject> dead_letters_;
  DropListener drop_listener_;

  std::mutex write_mu_;  // serializes owner-side application of writes
  std::mutex flush_mu_;
};

/// Background drainer for a cachelet's async write queue (live mode).
class AsyncDrainer {
 public:
  AsyncDrainer(Cachelet& cachelet, std::chrono::milliseconds period);
  ~AsyncDrainer();

  AsyncDrainer(const AsyncDrainer&) = delete;
  AsyncDrainer& operator=(const AsyncDrainer&) = delete;

 private:
  Cachelet& cachelet_;
  std::chrono::milliseconds period_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stop_ = false;
  std::thread worker_;
};

}  // namespace faast
