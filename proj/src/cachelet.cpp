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

#include "faast/cachelet.hpp"

#include "faast/error.hpp"

namespace faast {
namespace {

WireStatus status_for(Errc code) {
  switch (code) {
    case Errc::kNotFound:
      return WireStatus::kNotFound;
    case Errc::kRangeOutOfBounds:
      return WireStatus::kOutOfRange;
    default:
      return WireStatus::kError;
  }
}

[[noreturn]] void throw_status(WireStatus status, const ObjectKey& key) {
  switch (status) {
    case WireStatus::kNotFound:
      throw Error(Errc::kNotFound, key.path());
    case WireStatus::kOutOfRange:
      throw Error(Errc::kRangeOutOfBounds, key.path());
    default:
      throw Error(Errc::kBackendUnavailable, "owner could not serve " + key.path());
  }
}

}  // namespace

Millis CacheEntry::mean_inter_arrival() const {
  if (touches < 2) return Millis{0};
  return (last_access - first_touch) / static_cast<double>(touches - 1);
}

Cachelet::Cachelet(CacheletId id, CacheletConfig config, Storage& storage, Transport& transport,
                   const MembershipService& membership, const Clock& clock, std::uint64_t seed)
    : id_(std::move(id)),
      config_(config),
      storage_(storage),
      transport_(transport),
      membership_(membership),
      clock_(clock),
      capacity_(config.capacity),
      versions_("cachelet:" + id_.value, seed) {}

bool Cachelet::owns(const ObjectKey& key) const { return owner_of(key, *membership_.view()) == id_; }

ReadResult Cachelet::read(const ObjectKey& key, Charge& charge) {
  CacheletId owner = owner_of(key, *membership_.view());
  bool self_owner = owner == id_;
  auto seen = write_seq(key);

  if (auto local = cached(key)) {
    if (still_valid(*local, owner, self_owner, charge)) {
      admit_read(*local, self_owner, AccessClass::kLocalHit, seen);
      return {std::move(*local), AccessClass::kLocalHit};
    }
  }

  std::optional<WireMessage> response;
  if (!self_owner) {
    try {
      response = transport_.call(owner, WireMessage::get(key.path()), charge);
    } catch (const Error& e) {
      if (e.code() != Errc::kOwnerUnreachable) throw;
    }
  }

  ReadResult result;
  if (self_owner) {
    result = {fill_from_storage(key, true, AccessClass::kLocalMiss, seen, charge),
              AccessClass::kLocalMiss};
    return result;
  }
  if (!response) {
    // The owner is gone: go to storage ourselves.
    result = {storage_.get(key, charge), AccessClass::kLocalMiss};
  } else if (response->status == WireStatus::kOk || response->status == WireStatus::kFetched) {
    result.object = {key, response->version, response->payload};
    result.access = response->status == WireStatus::kOk ? AccessClass::kRemoteHit
                                                        : AccessClass::kRemoteMiss;
  } else {
    throw_status(response->status, key);
  }
  admit_read(result.object, self_owner, result.access, seen);
  return result;
}

bool Cachelet::still_valid(const VersionedObject& object, const CacheletId& owner,
                           bool self_owner, Charge& charge) {
  auto probe = [&] {
    try {
      return storage_.probe_version(object.key, charge) == object.version;
    } catch (const Error& e) {
      if (e.code() == Errc::kNotFound) return false;
      throw;
    }
  };
  switch (config_.mode.read_target()) {
    case ReadTarget::kLocal:
      return true;
    case ReadTarget::kStorage:
      return probe();
    case ReadTarget::kOwner:
      break;
  }
  if (self_owner) return true;
  WireMessage response;
  try {
    response = transport_.call(owner, WireMessage::get_version(object.key.path()), charge);
  } catch (const Error& e) {
    if (e.code() != Errc::kOwnerUnreachable) throw;
    return probe();
  }
  switch (response.status) {
    case WireStatus::kOk:
    case WireStatus::kFetched:
      return response.version == object.version;
    case WireStatus::kNotFound:
      return false;
    default:
      throw_status(response.status, object.key);
  }
}

VersionedObject Cachelet::fill_from_storage(const ObjectKey& key, bool owned,
                                            std::optional<AccessClass> access,
                                            std::uint64_t seen, Charge& charge) {
  std::unique_lock lock(write_mu_, std::defer_lock);
  if (owned) lock.lock();  // owners apply writes under this lock
  auto object = storage_.get(key, charge);
  admit_read(object, owned, access, seen);
  return object;
}

VersionToken Cachelet::next_version() {
  std::lock_guard lock(mu_);
  return versions_.next();
}

VersionToken Cachelet::write(const ObjectKey& key, Blob bytes, Charge& charge) {
  VersionedObject object{key, next_version(), std::move(bytes)};
  CacheletId owner = owner_of(key, *membership_.view());
  bool self_owner = owner == id_;

  if (config_.mode.write_target() == WriteTarget::kLocal) {
    std::lock_guard lock(write_mu_);
    admit_write(object, self_owner, true);
    persist(object, charge);
    return object.version;
  }

  if (self_owner) {
    std::lock_guard lock(write_mu_);
    owner_write(object, true, charge);
    return object.version;
  }

  std::optional<WireMessage> response;
  try {
    response = transport_.call(
        owner, WireMessage::put(key.path(), object.version, object.bytes), charge);
  } catch (const Error& e) {
    if (e.code() != Errc::kOwnerUnreachable) throw;
  }
  if (!response) {
    persist(object, charge);
  } else if (response->status != WireStatus::kOk) {
    throw_status(response->status, key);
  }
  admit_write(object, false, true);
  return object.version;
}

void Cachelet::owner_write(const VersionedObject& object, bool produced, Charge& charge) {
  admit_write(object, owns(object.key), produced);
  persist(object, charge);
}

void Cachelet::persist(const VersionedObject& object, Charge& charge) {
  if (config_.mode.write_target() == WriteTarget::kStorage ||
      config_.mode.write_mode() == WriteMode::kSync) {
    storage_.put_versioned(object, charge);
    return;
  }
  std::lock_guard lock(mu_);
  pending_.push_back(object);
}

std::size_t Cachelet::flush_async(Charge& charge) {
  std::lock_guard flush_lock(flush_mu_);
  std::deque<VersionedObject> batch;
  {
    std::lock_guard lock(mu_);
    batch.swap(pending_);
  }
  std::size_t written = 0;
  for (auto& object : batch) {
    try {
      storage_.put_versioned(object, charge);
      ++written;
    } catch (const Error&) {
      std::lock_guard lock(mu_);
      dead_letters_.push_back(std::move(object));
    }
  }
  return written;
}

// ---------------------------------------------------------------------------
// Serving peers

WireMessage Cachelet::serve(const WireMessage& request, Charge& charge) {
  if (request.response) return WireMessage::reply_to(request, WireStatus::kError);
  try {
    switch (request.type) {
      case MessageType::kGet:
        return serve_get(request, charge);
      case MessageType::kGetVersion:
        return serve_get_version(request, charge);
      case MessageType::kPut:
        return serve_put(request, charge);
      case MessageType::kRangeGet:
        return serve_range_get(request, charge);
      case MessageType::kHeartbeat:
        return WireMessage::reply_to(request, WireStatus::kOk);
    }
  } catch (const Error& e) {
    return WireMessage::reply_to(request, status_for(e.code()));
  }
  return WireMessage::reply_to(request, WireStatus::kError);
}

WireMessage Cachelet::serve_get(const WireMessage& request, Charge& charge) {
  auto key = ObjectKey::parse(request.key);
  bool owned = owns(key);
  auto seen = write_seq(key);
  std::optional<VersionedObject> object = cached(key);
  WireStatus status = WireStatus::kOk;
  if (object && config_.mode.read_target() == ReadTarget::kStorage) {
    try {
      if (storage_.probe_version(key, charge) != object->version) object.reset();
    } catch (const Error& e) {
      if (e.code() != Errc::kNotFound) throw;
      object.reset();
    }
  }
  if (!object) {
    object = fill_from_storage(key, owned, std::nullopt, seen, charge);
    status = WireStatus::kFetched;
  } else {
    admit_read(*object, owned, std::nullopt, seen);
  }
  auto reply = WireMessage::reply_to(request, status);
  reply.version = object->version;
  reply.payload = object->bytes;
  return reply;
}

WireMessage Cachelet::serve_get_version(const WireMessage& request, Charge& charge) {
  auto key = ObjectKey::parse(request.key);
  if (auto object = cached(key)) {
    auto reply = WireMessage::reply_to(request, WireStatus::kOk);
    reply.version = object->version;
    return reply;
  }
  auto reply = WireMessage::reply_to(request, WireStatus::kFetched);
  reply.version = storage_.probe_version(key, charge);
  return reply;
}

WireMessage Cachelet::serve_put(const WireMessage& request, Charge& charge) {
  if (request.version.is_null()) return WireMessage::reply_to(request, WireStatus::kError);
  VersionedObject object{ObjectKey::parse(request.key), request.version, request.payload};
  {
    std::lock_guard lock(write_mu_);
    owner_write(object, false, charge);
  }
  auto reply = WireMessage::reply_to(request, WireStatus::kOk);
  reply.version = object.version;
  return reply;
}

WireMessage Cachelet::serve_range_get(const WireMessage& request, Charge& charge) {
  auto key = ObjectKey::parse(request.key);
  if (auto object = cached(key)) {
    auto reply = WireMessage::reply_to(request, WireStatus::kOk);
    reply.payload = object->bytes.slice(request.offset, request.length);
    reply.version = object->version;
    return reply;
  }
  auto range = storage_.get_range(key, request.offset, request.length, charge);
  auto reply = WireMessage::reply_to(request, WireStatus::kFetched);
  reply.payload = std::move(range.bytes);
  reply.version = range.version;
  return reply;
}

// ---------------------------------------------------------------------------
// Cache contents

std::optional<VersionedObject> Cachelet::cached(const ObjectKey& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.object;
}

std::uint64_t Cachelet::write_seq(const ObjectKey& key) const {
  std::lock_guard lock(mu_);
  auto it = write_seqs_.find(key);
  return it == write_seqs_.end() ? 0 : it->second;
}

void Cachelet::touch_locked(CacheEntry& e, std::optional<AccessClass> access, bool produced) {
  e.recency = ++tick_;
  if (!access && !produced) return;
  Millis now = clock_.now();
  if (e.touches == 0) e.first_touch = now;
  e.last_access = now;
  ++e.touches;
  if (access) ++e.access_counts[static_cast<std::size_t>(*access)];
  if (produced) ++e.produced;
}

void Cachelet::admit_read(const VersionedObject& object, bool owned,
                          std::optional<AccessClass> access, std::uint64_t seen) {
  std::vector<Dropped> dropped;
  {
    std::lock_guard lock(mu_);
    if (access) ++window_accesses_;
    auto seq = write_seqs_.find(object.key);
    if (seq != write_seqs_.end() && seq->second != seen) {
      // A write to this key landed while we were reading; keep its copy.
      auto it = entries_.find(object.key);
      if (it != entries_.end()) touch_locked(it->second, access, false);
      return;
    }
    if (insert_locked(object, owned, dropped)) touch_locked(entries_.at(object.key), access, false);
  }
  notify(dropped);
}

void Cachelet::admit_write(const VersionedObject& object, bool owned, bool produced) {
  std::vector<Dropped> dropped;
  {
    std::lock_guard lock(mu_);
    if (produced) ++window_accesses_;
    ++write_seqs_[object.key];
    if (insert_locked(object, owned, dropped)) touch_locked(entries_.at(object.key), std::nullopt, produced);
  }
  notify(dropped);
}

bool Cachelet::install(VersionedObject object, bool owned) {
  std::vector<Dropped> dropped;
  bool cached_now;
  {
    std::lock_guard lock(mu_);
    cached_now = insert_locked(object, owned, dropped);
    if (cached_now) entries_.at(object.key).recency = ++tick_;
  }
  notify(dropped);
  return cached_now;
}

void Cachelet::record_external_read(VersionedObject object, AccessClass access) {
  bool owned = owns(object.key);
  admit_read(object, owned, access, write_seq(object.key));
}

bool Cachelet::insert_locked(const VersionedObject& object, bool owned,
                             std::vector<Dropped>& dropped) {
  auto it = entries_.find(object.key);
  if (it != entries_.end() && it->second.object.version == object.version &&
      it->second.object.size() == object.size()) {
    it->second.owned = owned;
    return true;
  }
  CacheEntry entry;
  if (it != entries_.end()) {
    entry = std::move(it->second);
    used_ -= entry.object.size();
    entries_.erase(it);
  }
  if (object.size() > capacity_) {
    dropped.push_back({object.key, DropReason::kTooLarge});
    return false;
  }
  if (used_ + object.size() > capacity_) {
    evict_locked(used_ + object.size() - capacity_, config_.policy, dropped);
  }
  entry.object = object;
  entry.owned = owned;
  used_ += object.size();
  entries_.emplace(object.key, std::move(entry));
  return true;
}

std::vector<ObjectKey> Cachelet::evict_locked(std::uint64_t need, const EvictionPolicy& policy,
                                              std::vector<Dropped>& dropped) {
  std::vector<EvictionCandidate> candidates;
  candidates.reserve(entries_.size());
  for (const auto& [key, e] : entries_) {
    candidates.push_back({key, e.object.size(), e.owned, e.recency});
  }
  std::vector<ObjectKey> evicted;
  for (auto i : select_victims(candidates, need, policy)) {
    const auto& key = candidates[i].key;
    used_ -= candidates[i].size;
    entries_.erase(key);
    ++eviction_counts_[key];
    dropped.push_back({key, DropReason::kEvicted});
    evicted.push_back(key);
  }
  return evicted;
}

void Cachelet::notify(const std::vector<Dropped>& dropped) {
  if (dropped.empty()) return;
  DropListener listener;
  {
    std::lock_guard lock(mu_);
    listener = drop_listener_;
  }
  if (!listener) return;
  for (const auto& d : dropped) listener(id_, d.key, d.reason);
}

std::vector<ObjectKey> Cachelet::evict(std::uint64_t need, const EvictionPolicy& policy) {
  std::vector<Dropped> dropped;
  std::vector<ObjectKey> evicted;
  {
    std::lock_guard lock(mu_);
    evicted = evict_locked(need, policy, dropped);
  }
  notify(dropped);
  return evicted;
}

bool Cachelet::contains(const ObjectKey& key) const {
  std::lock_guard lock(mu_);
  return entries_.contains(key);
}

std::optional<CacheEntry> Cachelet::entry(const ObjectKey& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<CacheEntry> Cachelet::entries() const {
  std::lock_guard lock(mu_);
  std::vector<CacheEntry> out;
  out.reserve(entries_.size());
  for (const auto& [key, e] : entries_) out.push_back(e);
  return out;
}

std::vector<EvictionCandidate> Cachelet::eviction_candidates() const {
  std::lock_guard lock(mu_);
  std::vector<EvictionCandidate> out;
  for (const auto& [key, e] : entries_) out.push_back({key, e.object.size(), e.owned, e.recency});
  return out;
}

std::uint64_t Cachelet::used_bytes() const {
  std::lock_guard lock(mu_);
  return used_;
}

std::uint64_t Cachelet::capacity() const {
  std::lock_guard lock(mu_);
  return capacity_;
}

std::uint64_t Cachelet::free_bytes() const {
  std::lock_guard lock(mu_);
  return capacity_ - used_;
}

void Cachelet::set_capacity(std::uint64_t capacity) {
  std::vector<Dropped> dropped;
  {
    std::lock_guard lock(mu_);
    capacity_ = capacity;
    if (used_ > capacity_) evict_locked(used_ - capacity_, config_.policy, dropped);
  }
  notify(dropped);
}

std::map<ObjectKey, std::uint64_t> Cachelet::take_eviction_counts() {
  std::lock_guard lock(mu_);
  return std::exchange(eviction_counts_, {});
}

std::uint64_t Cachelet::take_window_accesses() {
  std::lock_guard lock(mu_);
  return std::exchange(window_accesses_, 0);
}

std::size_t Cachelet::pending_async() const {
  std::lock_guard lock(mu_);
  return pending_.size();
}

std::vector<VersionedObject> Cachelet::dead_letters() const {
  std::lock_guard lock(mu_);
  return dead_letters_;
}

void Cachelet::set_drop_listener(DropListener listener) {
  std::lock_guard lock(mu_);
  drop_listener_ = std::move(listener);
}

// ---------------------------------------------------------------------------

AsyncDrainer::AsyncDrainer(Cachelet& cachelet, std::chrono::milliseconds period)
    : cachelet_(cachelet), period_(period) {
  worker_ = std::thread([this] {
    std::unique_lock lock(mu_);
    while (!stop_) {
      cv_.wait_for(lock, period_, [this] { return stop_; });
      lock.unlock();
      Charge ignored;
      cachelet_.flush_async(ignored);
      lock.lock();
    }
  });
}

AsyncDrainer::~AsyncDrainer() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

}  // namespace faast
