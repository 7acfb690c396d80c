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

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faast/types.hpp"

namespace faast {

/// Consistent-hash ring with a fixed number of virtual replicas per cachelet.
///
/// Replica i of cachelet c sits at SHA256("<c>:<i>"). Positions compare as
/// 256-bit big-endian integers; equal positions order by cachelet id.
class HashRing {
 public:
  static constexpr std::size_t kReplicasPerCachelet = 100;

  struct Entry {
    Hash256 position;
    CacheletId cachelet;

    friend auto operator<=>(const Entry&, const Entry&) = default;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  HashRing() = default;

  static HashRing build(const std::set<CacheletId>& cachelets);
  static Hash256 replica_position(const CacheletId& id, std::size_t replica);

  HashRing with(const CacheletId& id) const;
  HashRing without(const CacheletId& id) const;

  /// Cachelet of the first entry at or clockwise after `point`.
  const CacheletId& successor(const Hash256& point) const;

  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t replicas_of(const CacheletId& id) const;
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::vector<Entry> entries_;
};

/// Immutable snapshot of the live cachelets of one application.
class MembershipView {
 public:
  MembershipView();

  std::uint64_t epoch() const noexcept { return epoch_; }
  const std::set<CacheletId>& live() const noexcept { return live_; }
  const HashRing& ring() const noexcept { return *ring_; }
  const std::map<CacheletId, Millis>& heartbeats() const noexcept { return heartbeats_; }
  bool contains(const CacheletId& id) const { return live_.contains(id); }

 private:
  friend MembershipView add_cachelet(const MembershipView&, const CacheletId&, Millis);
  friend MembershipView remove_cachelet(const MembershipView&, const CacheletId&);
  friend MembershipView heartbeat(const MembershipView&, const CacheletId&, Millis);
  friend MembershipView expire(const MembershipView&, Millis, Millis);
  friend MembershipView parse_membership(std::string_view);

  std::uint64_t epoch_ = 0;
  std::set<CacheletId> live_;
  std::shared_ptr<const HashRing> ring_;
  std::map<CacheletId, Millis> heartbeats_;
};

/// Owner of `key`. Throws kEmptyMembership when nobody is live.
CacheletId owner_of(const ObjectKey& key, const MembershipView& view);

/// Throws kDuplicateId. The new cachelet's heartbeat starts at `now`.
MembershipView add_cachelet(const MembershipView& view, const CacheletId& id, Millis now = {});
/// Throws kUnknownId.
MembershipView remove_cachelet(const MembershipView& view, const CacheletId& id);
/// Throws kUnknownId. Does not bump the epoch.
MembershipView heartbeat(const MembershipView& view, const CacheletId& id, Millis now);
/// Drops every cachelet whose last heartbeat is older than `timeout`.
MembershipView expire(const MembershipView& view, Millis now, Millis timeout);

/// Membership blob: one `epoch<TAB>id<TAB>last_seen_ms` line per cachelet.
std::string serialize_membership(const MembershipView& view);
MembershipView parse_membership(std::string_view text);

/// Reserved storage key of the membership blob.
ObjectKey membership_blob_key();

/// Holder of the current view. Readers take snapshots; a single
/// maintainer applies changes through update().
class MembershipService {
 public:
  MembershipService() : view_(std::make_shared<const MembershipView>()) {}

  std::shared_ptr<const MembershipView> view() const;
  std::shared_ptr<const MembershipView> update(
      const std::function<MembershipView(const MembershipView&)>& change);

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const MembershipView> view_;
};

}  // namespace faast
