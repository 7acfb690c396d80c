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

#include "faast/membership.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "faast/error.hpp"

namespace faast {

Hash256 HashRing::replica_position(const CacheletId& id, std::size_t replica) {
  return sha256(id.value + ":" + std::to_string(replica));
}

HashRing HashRing::build(const std::set<CacheletId>& cachelets) {
  HashRing ring;
  ring.entries_.reserve(cachelets.size() * kReplicasPerCachelet);
  for (const auto& id : cachelets) {
    for (std::size_t i = 0; i < kReplicasPerCachelet; ++i) {
      ring.entries_.push_back({replica_position(id, i), id});
    }
  }
  std::sort(ring.entries_.begin(), ring.entries_.end());
  return ring;
}

HashRing HashRing::with(const CacheletId& id) const {
  std::vector<Entry> added;
  added.reserve(kReplicasPerCachelet);
  for (std::size_t i = 0; i < kReplicasPerCachelet; ++i) added.push_back({replica_position(id, i), id});
  std::sort(added.begin(), added.end());
  HashRing ring;
  ring.entries_.reserve(entries_.size() + added.size());
  std::merge(entries_.begin(), entries_.end(), added.begin(), added.end(),
             std::back_inserter(ring.entries_));
  return ring;
}

HashRing HashRing::without(const CacheletId& id) const {
  HashRing ring;
  ring.entries_.reserve(entries_.size());
  std::copy_if(entries_.begin(), entries_.end(), std::back_inserter(ring.entries_),
               [&](const Entry& e) { return e.cachelet != id; });
  return ring;
}

const CacheletId& HashRing::successor(const Hash256& point) const {
  if (entries_.empty()) throw Error(Errc::kEmptyMembership, "ring has no cachelets");
  auto it = std::lower_bound(entries_.begin(), entries_.end(), point,
                             [](const Entry& e, const Hash256& p) { return e.position < p; });
  if (it == entries_.end()) it = entries_.begin();
  return it->cachelet;
}

std::size_t HashRing::replicas_of(const CacheletId& id) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [&](const Entry& e) { return e.cachelet == id; }));
}

MembershipView::MembershipView() : ring_(std::make_shared<const HashRing>()) {}

CacheletId owner_of(const ObjectKey& key, const MembershipView& view) {
  if (view.live().empty()) throw Error(Errc::kEmptyMembership, "no live cachelets");
  return view.ring().successor(sha256(key.path()));
}

MembershipView add_cachelet(const MembershipView& view, const CacheletId& id, Millis now) {
  if (view.contains(id)) throw Error(Errc::kDuplicateId, id.value);
  MembershipView next = view;
  next.epoch_ = view.epoch_ + 1;
  next.live_.insert(id);
  next.ring_ = std::make_shared<const HashRing>(view.ring().with(id));
  next.heartbeats_[id] = now;
  return next;
}

MembershipView remove_cachelet(const MembershipView& view, const CacheletId& id) {
  if (!view.contains(id)) throw Error(Errc::kUnknownId, id.value);
  MembershipView next = view;
  next.epoch_ = view.epoch_ + 1;
  next.live_.erase(id);
  next.ring_ = std::make_shared<const HashRing>(view.ring().without(id));
  next.heartbeats_.erase(id);
  return next;
}

MembershipView heartbeat(const MembershipView& view, const CacheletId& id, Millis now) {
  if (!view.contains(id)) throw Error(Errc::kUnknownId, id.value);
  MembershipView next = view;
  next.heartbeats_[id] = now;
  return next;
}

MembershipView expire(const MembershipView& view, Millis now, Millis timeout) {
  std::vector<CacheletId> stale;
  for (const auto& [id, seen] : view.heartbeats_) {
    if (now - seen > timeout) stale.push_back(id);
  }
  if (stale.empty()) return view;
  MembershipView next = view;
  next.epoch_ = view.epoch_ + 1;
  auto ring = view.ring();
  for (const auto& id : stale) {
    next.live_.erase(id);
    next.heartbeats_.erase(id);
    ring = ring.without(id);
  }
  next.ring_ = std::make_shared<const HashRing>(std::move(ring));
  return next;
}

std::string serialize_membership(const MembershipView& view) {
  std::ostringstream out;
  for (const auto& id : view.live()) {
    auto seen = view.heartbeats().at(id);
    out << view.epoch() << '\t' << id.value << '\t'
        << static_cast<long long>(std::llround(seen.count())) << '\n';
  }
  return out.str();
}

MembershipView parse_membership(std::string_view text) {
  MembershipView view;
  bool first = true;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;

    auto bad = [&](const char* why) {
      return Error(Errc::kInvalidArgument,
                   "membership line " + std::to_string(line_no) + ": " + why);
    };
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) throw bad("expected 3 tab-separated fields");

    std::uint64_t epoch = 0;
    long long seen = 0;
    auto epoch_field = line.substr(0, t1);
    auto seen_field = line.substr(t2 + 1);
    if (std::from_chars(epoch_field.data(), epoch_field.data() + epoch_field.size(), epoch).ec !=
        std::errc{}) {
      throw bad("bad epoch");
    }
    if (std::from_chars(seen_field.data(), seen_field.data() + seen_field.size(), seen).ec !=
        std::errc{}) {
      throw bad("bad last_seen_ms");
    }
    if (!first && epoch != view.epoch_) throw bad("inconsistent epoch");
    first = false;

    CacheletId id{std::string(line.substr(t1 + 1, t2 - t1 - 1))};
    if (id.value.empty()) throw bad("empty cachelet id");
    if (!view.live_.insert(id).second) throw bad("duplicate cachelet id");
    view.epoch_ = epoch;
    view.heartbeats_[id] = Millis(static_cast<double>(seen));
  }
  view.ring_ = std::make_shared<const HashRing>(HashRing::build(view.live_));
  return view;
}

ObjectKey membership_blob_key() { return ObjectKey("__faast", "membership"); }

std::shared_ptr<const MembershipView> MembershipService::view() const {
  std::lock_guard lock(mu_);
  return view_;
}

std::shared_ptr<const MembershipView> MembershipService::update(
    const std::function<MembershipView(const MembershipView&)>& change) {
  std::lock_guard lock(mu_);
  view_ = std::make_shared<const MembershipView>(change(*view_));
  return view_;
}

}  // namespace faast
