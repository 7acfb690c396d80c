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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faast/policies.hpp"
#include "faast/scaling.hpp"
#include "faast/storage.hpp"
#include "faast/trace.hpp"
#include "faast/transport.hpp"

namespace faast {

// ---------------------------------------------------------------------------
// Configuration

struct ReplayConfig {
  StorageModel storage;
  LinkModel link;

  std::uint64_t cache_capacity = 512 * kMB;  // per instance
  ConsistencyMode mode = ConsistencyMode::storage_sync_storage();
  EvictionPolicy policy;

  bool prewarm_enabled = true;
  PrewarmConfig prewarm;

  Millis idle_timeout{10 * 60'000};
  Millis histogram_bin{60'000};
  double idle_percentile = 0.99;
  Millis prewarm_lead{60'000};
  /// Reload the app ahead of the predicted next invocation.
  bool reload_before_invocation = true;

  bool scaling_enabled = true;
  bool bandwidth_scaling = true;
  Millis controller_window{10'000};
  unsigned min_instances = 1;
  unsigned max_instances = kMaxFanout;
  BandwidthProfile bandwidth;  // t_load doubles as the app load time

  Millis default_exec{0};
  std::map<std::string, Millis> exec;  // per function id

  CostParams cost;
  double function_memory_gb = 2.0;

  Millis exec_time(const std::string& func) const;
  void validate() const;
};

/// Reads an INI file (sections storage, transport, cache, prewarm,
/// keepalive, controller, function, exec, cost). Missing keys keep their
/// defaults; unknown sections or keys throw kMalformedConfig.
ReplayConfig parse_config(const std::string& text);
ReplayConfig load_config(const std::filesystem::path& path);

/// Parses byte counts such as `512M`, `12K`, `1G` or plain integers.
std::uint64_t parse_bytes(std::string_view text);

// ---------------------------------------------------------------------------
// Keep-alive

class IdleHistogram {
 public:
  explicit IdleHistogram(Millis bin_width = Millis{60'000});

  void add(Millis idle);
  std::uint64_t count() const noexcept { return count_; }
  Millis bin_width() const noexcept { return width_; }
  const std::map<std::uint64_t, std::uint64_t>& bins() const noexcept { return bins_; }

  /// Lower edge of the bin holding the p-th quantile (nearest rank).
  std::optional<Millis> percentile(double p) const;

 private:
  Millis width_;
  std::map<std::uint64_t, std::uint64_t> bins_;
  std::uint64_t count_ = 0;
};

struct KeepAliveDecision {
  Millis unload_after{0};
  std::optional<Millis> predicted_next;
  std::optional<Millis> prewarm_at;
};

/// `idle_start` is when the app went idle. With no history there is no
/// prediction and no pre-warm; otherwise pre-warm `lead` before the
/// `percentile` idle time, but never before `idle_start`.
KeepAliveDecision keep_alive_decide(const IdleHistogram& histogram, Millis idle_start,
                                    Millis idle_timeout, double percentile = 0.99,
                                    Millis lead = Millis{60'000});

// ---------------------------------------------------------------------------
// Replay

struct InvocationRecord {
  std::string app;
  std::string func;
  Millis arrival{0};
  std::string instance;
  bool cold = false;
  Millis wait{0};  // load time paid by this invocation
  std::uint32_t reads = 0;
  std::uint32_t writes = 0;
  Millis data{0};
  Millis latency{0};
  Millis baseline{0};
};

struct AccessRecord {
  Millis time{0};
  std::string app;
  std::string func;
  std::string instance;
  std::string op;  // read, write, prewarm, evict, too-large
  ObjectKey key;
  std::uint64_t size = 0;
  std::string access_class;  // LH/RH/LM/RM for reads, empty otherwise
  std::string version;
  Millis latency{0};
};

struct RunMetrics {
  std::array<std::uint64_t, kAccessClassCount> class_counts{};
  std::uint64_t invocations = 0;
  std::uint64_t cold_starts = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t loads = 0;
  std::uint64_t prewarm_objects = 0;
  std::uint64_t bytes_requested = 0;
  std::uint64_t bytes_from_storage = 0;
  std::uint64_t bytes_from_cache = 0;
  std::uint64_t bytes_prewarmed = 0;
  std::uint64_t bytes_written = 0;
  std::uint64_t storage_ops = 0;
  std::uint64_t baseline_storage_ops = 0;
  std::uint64_t dead_letters = 0;
  Millis mean_latency{0};
  Millis p50_latency{0};
  Millis p99_latency{0};
  Millis baseline_mean_latency{0};
  double improvement_pct = 0;         // mean latency vs blob-only
  double median_improvement_pct = 0;  // per-invocation improvement, median
  double cost = 0;
  double baseline_cost = 0;
};

struct ReplayResult {
  RunMetrics metrics;
  std::vector<InvocationRecord> invocations;
  std::vector<AccessRecord> accesses;
  std::map<std::string, std::string> controller_logs;  // per app, CSV
};

/// Deterministic replay on a virtual clock. Each app gets its own storage,
/// membership and instances.
ReplayResult replay(const std::vector<TraceEvent>& trace, const ReplayConfig& config,
                    std::uint64_t seed);

std::string metrics_csv(const RunMetrics& metrics);
std::string invocations_csv(const std::vector<InvocationRecord>& invocations);
std::string accesses_csv(const std::vector<AccessRecord>& accesses);

/// Writes metrics.csv, invocations.csv, controller-<app>.csv and, if
/// asked, accesses.csv into `dir` (created if needed).
void write_replay_outputs(const ReplayResult& result, const std::filesystem::path& dir,
                          bool with_accesses);

// ---------------------------------------------------------------------------
// Counter workload

struct CounterResult {
  std::uint64_t final_value = 0;
  std::uint64_t inconsistencies = 0;
  Millis e2e{0};
  Millis per_request{0};
};

/// `instances` cachelets take turns incrementing one shared counter
/// (read, add one, write) until `target` increments were issued. Async
/// queues are drained at the end; the final value is what storage holds.
CounterResult run_counter(unsigned instances, std::uint64_t target, const ConsistencyMode& mode,
                          const StorageModel& storage = {}, const LinkModel& link = {},
                          std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Bandwidth sweep

struct SweepRow {
  std::uint64_t size = 0;
  unsigned fanout = 1;
  bool loaded = true;
  Millis fetch{0};  // simulated parallel fetch
  Millis model{0};  // t_dr
};

/// One simulated parallel fetch per (size, fanout). Storage streams run at
/// bw_bs and instance links at bw_inst; cold rows add t_load whenever extra
/// instances are needed.
std::vector<SweepRow> bw_sweep(const std::vector<std::uint64_t>& sizes,
                               const std::vector<unsigned>& fanouts,
                               const BandwidthProfile& profile, bool loaded,
                               StorageModel storage = {}, LinkModel link = {});

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace faast
