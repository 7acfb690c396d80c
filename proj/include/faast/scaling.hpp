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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faast/cachelet.hpp"

namespace faast {

// ---------------------------------------------------------------------------
// Bandwidth scaling

struct BandwidthProfile {
  Millis t_load{1500};
  double bw_bs_mb_s = 90;     // storage to one instance
  double bw_inst_mb_s = 500;  // instance to instance

  void validate() const;
};

inline constexpr unsigned kMaxFanout = 32;

/// Modeled time to fetch `bytes` split across `fanout` instances. The load
/// term applies once, and only when extra instances must be started.
Millis t_dr(std::uint64_t bytes, unsigned fanout, const BandwidthProfile& profile, bool loaded);

/// Walks N upward from `current` and stops at the first N whose next step
/// is slower or improves by less than 10%.
unsigned choose_fanout(std::uint64_t bytes, const BandwidthProfile& profile, unsigned current,
                       bool loaded, unsigned max_fanout = kMaxFanout);

/// Same walk from N = 1, where N counts as loaded while N <= `live`.
unsigned plan_fanout(std::uint64_t bytes, const BandwidthProfile& profile, unsigned live,
                     unsigned max_fanout = kMaxFanout);

struct ByteRange {
  std::uint64_t offset = 0;
  std::uint64_t length = 0;

  friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

/// `fanout` contiguous ranges of size/fanout bytes; the last one absorbs
/// the remainder.
std::vector<ByteRange> split_ranges(std::uint64_t size, unsigned fanout);

/// Fetches `key` as one range per participant: the initiator reads its own
/// range from storage and each helper is sent a RANGE_GET. Ranges run in
/// parallel; the charge is the slowest range plus the inbound transfers,
/// which share the initiator's link. A failed or inconsistent range is
/// retried once, then read directly by the initiator.
VersionedObject parallel_fetch(Cachelet& initiator, const ObjectKey& key,
                               std::span<const CacheletId> helpers, Charge& charge);

// ---------------------------------------------------------------------------
// Votes and the controller

enum class VoteSource { kCompute, kCacheSize, kBandwidth };

std::string_view vote_source_name(VoteSource source) noexcept;

struct ScalingVote {
  VoteSource source;
  int delta = 0;
};

/// +1 if any key was evicted at least twice since the last query, -1 if
/// the cachelet saw fewer than `min_accesses` accesses, else 0. Resets the
/// cachelet's counters.
ScalingVote cache_size_vote(Cachelet& cachelet, std::uint64_t min_accesses = 1);

/// +1 when more invocations are queued than there are instances, -1 when
/// no invocation arrived during the window.
ScalingVote compute_vote(std::uint64_t queued, unsigned instances,
                         std::uint64_t invocations_in_window);

/// Scale out if anyone asks to (by the largest request); scale in only if
/// everyone agrees (by the smallest request); otherwise hold.
int resolve_votes(std::span<const ScalingVote> votes);

struct ControllerState {
  struct Pending {
    Millis ready_at{0};
    unsigned count = 0;
  };

  unsigned current = 1;
  unsigned min_instances = 1;
  unsigned max_instances = kMaxFanout;
  std::vector<Pending> pending;  // ordered by ready_at

  unsigned target() const;
  void validate() const;
};

struct ScaleOutcome {
  ControllerState state;
  int applied = 0;
  bool clamped = false;
};

/// Scale-out instances arrive at now + t_load; scale-in drops the newest
/// instances (pending ones first) immediately.
ScaleOutcome apply_scale(const ControllerState& state, int delta, Millis now, Millis t_load);

/// Moves pending instances that are ready by `now` into the live count.
/// Returns how many arrived.
unsigned advance(ControllerState& state, Millis now);

/// The scale controller as a single actor with a decision log.
class ScaleController {
 public:
  ScaleController(ControllerState state, Millis t_load);

  /// Periodic query: resolves the votes and applies the result.
  ScaleOutcome query(Millis now, std::span<const ScalingVote> votes);
  /// Out-of-band request (bandwidth scaling), applied immediately.
  ScaleOutcome request(Millis now, const ScalingVote& vote);
  unsigned tick(Millis now) { return advance(state_, now); }

  const ControllerState& state() const noexcept { return state_; }
  Millis t_load() const noexcept { return t_load_; }
  /// `time_ms,source,votes,delta,instances` rows, with header.
  std::string log_csv() const;

 private:
  ScaleOutcome record(Millis now, std::string_view source, std::span<const ScalingVote> votes,
                      int delta);

  ControllerState state_;
  Millis t_load_;
  std::vector<std::string> rows_;
};

}  // namespace faast
