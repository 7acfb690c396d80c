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

#include "faast/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "faast/error.hpp"

namespace faast {

void BandwidthProfile::validate() const {
  if (!(t_load.count() >= 0) || !(bw_bs_mb_s > 0) || !(bw_inst_mb_s > 0)) {
    throw Error(Errc::kInvalidArgument, "bandwidths must be positive and t_load non-negative");
  }
}

Millis t_dr(std::uint64_t bytes, unsigned fanout, const BandwidthProfile& profile, bool loaded) {
  if (fanout == 0) throw Error(Errc::kInvalidArgument, "fanout must be at least 1");
  double s = static_cast<double>(bytes) / static_cast<double>(kMB);
  double share = s / fanout;
  double seconds = share / profile.bw_bs_mb_s + (s - share) / profile.bw_inst_mb_s;
  Millis t{seconds * 1000.0};
  if (!loaded && fanout > 1) t += profile.t_load;
  return t;
}

namespace {

template <typename LoadedFor>
unsigned walk_fanout(std::uint64_t bytes, const BandwidthProfile& profile, unsigned start,
                     unsigned max_fanout, LoadedFor loaded_for) {
  unsigned n = std::max(1u, start);
  while (n < max_fanout) {
    double here = t_dr(bytes, n, profile, loaded_for(n)).count();
    double next = t_dr(bytes, n + 1, profile, loaded_for(n + 1)).count();
    // An improvement of exactly 10% still counts; the slack absorbs round-off.
    if (next > here || (here - next) < 0.1 * here * (1 - 1e-9)) return n;
    ++n;
  }
  return std::min(n, std::max(1u, max_fanout));
}

}  // namespace

unsigned choose_fanout(std::uint64_t bytes, const BandwidthProfile& profile, unsigned current,
                       bool loaded, unsigned max_fanout) {
  return walk_fanout(bytes, profile, current, max_fanout, [&](unsigned) { return loaded; });
}

unsigned plan_fanout(std::uint64_t bytes, const BandwidthProfile& profile, unsigned live,
                     unsigned max_fanout) {
  return walk_fanout(bytes, profile, 1, max_fanout, [&](unsigned n) { return n <= live; });
}

std::vector<ByteRange> split_ranges(std::uint64_t size, unsigned fanout) {
  if (fanout == 0) throw Error(Errc::kInvalidArgument, "fanout must be at least 1");
  std::uint64_t share = size / fanout;
  std::vector<ByteRange> ranges;
  ranges.reserve(fanout);
  for (unsigned i = 0; i < fanout; ++i) {
    std::uint64_t offset = share * i;
    ranges.push_back({offset, i + 1 == fanout ? size - offset : share});
  }
  return ranges;
}

VersionedObject parallel_fetch(Cachelet& initiator, const ObjectKey& key,
                               std::span<const CacheletId> helpers, Charge& charge) {
  Storage& storage = initiator.storage();
  if (helpers.empty()) return storage.get(key, charge);

  auto info = storage.stat(key, charge);
  const auto fanout = static_cast<unsigned>(helpers.size() + 1);
  auto ranges = split_ranges(info.size, fanout);
  std::vector<Blob> parts(fanout);
  std::vector<Charge> charges(fanout);
  bool changed = false;
  {
    Storage::StreamGroup streams(storage, fanout);
    auto direct = [&](std::size_t i) {
      auto r = storage.get_range(key, ranges[i].offset, ranges[i].length, charges[i]);
      if (r.version != info.version) {
        changed = true;
        return;
      }
      parts[i] = std::move(r.bytes);
    };
    direct(0);
    for (std::size_t i = 1; i < fanout && !changed; ++i) {
      auto request = WireMessage::range_get(key.path(), ranges[i].offset, ranges[i].length);
      bool ok = false;
      for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
        try {
          auto response = initiator.transport().call(helpers[i - 1], request, charges[i]);
          ok = (response.status == WireStatus::kOk || response.status == WireStatus::kFetched) &&
               response.version == info.version && response.payload.size() == ranges[i].length;
          if (ok) parts[i] = std::move(response.payload);
        } catch (const Error& e) {
          if (e.code() != Errc::kOwnerUnreachable) throw;
        }
      }
      if (!ok) direct(i);
    }
  }
  if (changed) {
    // The object was overwritten mid-fetch; a plain read gives one version.
    for (const auto& c : charges) charge.merge(c);
    return storage.get(key, charge);
  }

  Millis slowest{0};
  Millis inbound{0};
  for (const auto& c : charges) {
    slowest = std::max(slowest, c.total() - c.transfer());
    inbound += c.transfer();
  }
  charge.add(slowest);
  charge.add_transfer(inbound);
  return {key, info.version, Blob::concat(parts)};
}

// ---------------------------------------------------------------------------

std::string_view vote_source_name(VoteSource source) noexcept {
  switch (source) {
    case VoteSource::kCompute:
      return "compute";
    case VoteSource::kCacheSize:
      return "cache-size";
    case VoteSource::kBandwidth:
      return "bandwidth";
  }
  return "?";
}

ScalingVote cache_size_vote(Cachelet& cachelet, std::uint64_t min_accesses) {
  auto evictions = cachelet.take_eviction_counts();
  auto accesses = cachelet.take_window_accesses();
  for (const auto& [key, count] : evictions) {
    if (count >= 2) return {VoteSource::kCacheSize, 1};
  }
  return {VoteSource::kCacheSize, accesses < min_accesses ? -1 : 0};
}

ScalingVote compute_vote(std::uint64_t queued, unsigned instances,
                         std::uint64_t invocations_in_window) {
  if (queued > instances) return {VoteSource::kCompute, 1};
  if (invocations_in_window == 0) return {VoteSource::kCompute, -1};
  return {VoteSource::kCompute, 0};
}

int resolve_votes(std::span<const ScalingVote> votes) {
  if (votes.empty()) throw Error(Errc::kInvalidArgument, "no votes to resolve");
  int highest = votes.front().delta;
  for (const auto& v : votes) highest = std::max(highest, v.delta);
  return highest;
}

unsigned ControllerState::target() const {
  unsigned n = current;
  for (const auto& p : pending) n += p.count;
  return n;
}

void ControllerState::validate() const {
  if (min_instances == 0 || min_instances > max_instances || current < min_instances ||
      current > max_instances) {
    throw Error(Errc::kInvalidArgument, "controller requires 1 <= min <= current <= max");
  }
}

ScaleOutcome apply_scale(const ControllerState& state, int delta, Millis now, Millis t_load) {
  ScaleOutcome out{state, 0, false};
  auto& s = out.state;
  long target = s.target();
  long wanted = target + delta;
  long allowed = std::clamp<long>(wanted, s.min_instances, s.max_instances);
  out.clamped = allowed != wanted;
  out.applied = static_cast<int>(allowed - target);
  if (out.applied > 0) {
    s.pending.push_back({now + t_load, static_cast<unsigned>(out.applied)});
  } else if (out.applied < 0) {
    auto remove = static_cast<unsigned>(-out.applied);
    while (remove > 0 && !s.pending.empty()) {
      auto& last = s.pending.back();
      auto n = std::min(remove, last.count);
      last.count -= n;
      remove -= n;
      if (last.count == 0) s.pending.pop_back();
    }
    s.current -= std::min(remove, s.current);
  }
  return out;
}

unsigned advance(ControllerState& state, Millis now) {
  unsigned arrived = 0;
  auto it = state.pending.begin();
  while (it != state.pending.end() && it->ready_at <= now) {
    arrived += it->count;
    ++it;
  }
  state.pending.erase(state.pending.begin(), it);
  state.current += arrived;
  return arrived;
}

ScaleController::ScaleController(ControllerState state, Millis t_load)
    : state_(std::move(state)), t_load_(t_load) {
  state_.validate();
}

ScaleOutcome ScaleController::query(Millis now, std::span<const ScalingVote> votes) {
  return record(now, "periodic", votes, resolve_votes(votes));
}

ScaleOutcome ScaleController::request(Millis now, const ScalingVote& vote) {
  return record(now, vote_source_name(vote.source), std::span(&vote, 1), vote.delta);
}

ScaleOutcome ScaleController::record(Millis now, std::string_view source,
                                     std::span<const ScalingVote> votes, int delta) {
  advance(state_, now);
  auto outcome = apply_scale(state_, delta, now, t_load_);
  state_ = outcome.state;
  std::ostringstream row;
  row << std::llround(now.count()) << ',' << source << ',';
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (i > 0) row << ' ';
    row << vote_source_name(votes[i].source) << ':' << (votes[i].delta > 0 ? "+" : "")
        << votes[i].delta;
  }
  row << ',' << outcome.applied << ',' << state_.target();
  rows_.push_back(row.str());
  return outcome;
}

std::string ScaleController::log_csv() const {
  std::string out = "time_ms,source,votes,delta,instances\n";
  for (const auto& r : rows_) {
    out += r;
    out += '\n';
  }
  return out;
}

}  // namespace faast
