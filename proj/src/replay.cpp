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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "faast/error.hpp"
#include "faast/harness.hpp"

namespace faast {

IdleHistogram::IdleHistogram(Millis bin_width) : width_(bin_width) {
  if (width_.count() <= 0) throw Error(Errc::kInvalidArgument, "histogram bin width must be positive");
}

void IdleHistogram::add(Millis idle) {
  if (idle.count() < 0) idle = Millis{0};
  ++bins_[static_cast<std::uint64_t>(idle / width_)];
  ++count_;
}

std::optional<Millis> IdleHistogram::percentile(double p) const {
  if (count_ == 0) return std::nullopt;
  auto rank = static_cast<std::uint64_t>(std::ceil(p * static_cast<double>(count_)));
  rank = std::clamp<std::uint64_t>(rank, 1, count_);
  std::uint64_t seen = 0;
  for (const auto& [bin, n] : bins_) {
    seen += n;
    if (seen >= rank) return width_ * static_cast<double>(bin);
  }
  return width_ * static_cast<double>(bins_.rbegin()->first);
}

KeepAliveDecision keep_alive_decide(const IdleHistogram& histogram, Millis idle_start,
                                    Millis idle_timeout, double percentile, Millis lead) {
  KeepAliveDecision d;
  d.unload_after = idle_timeout;
  auto idle = histogram.percentile(percentile);
  if (!idle) return d;
  d.predicted_next = idle_start + *idle;
  d.prewarm_at = std::max(idle_start, *d.predicted_next - lead);
  return d;
}

namespace {

constexpr Millis kForever{1e300};

std::uint64_t key_seed(const ObjectKey& key, std::uint64_t salt) {
  auto h = sha256(key.path());
  std::uint64_t v;
  std::memcpy(&v, h.data(), sizeof(v));
  return v ^ salt;
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

Millis nearest_rank(std::vector<Millis> values, double p) {
  if (values.empty()) return Millis{0};
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

/// One application: its storage, instances, keep-alive state and scaling.
class AppSim {
 public:
  AppSim(std::string app, const ReplayConfig& config, std::uint64_t seed, ReplayResult& out)
      : app_(std::move(app)),
        cfg_(config),
        seed_(seed ^ key_seed(ObjectKey("app", app_), 0)),
        out_(out),
        storage_(config.storage, seed_),
        transport_(config.link),
        hist_(config.histogram_bin) {
    profile_ = cfg_.bandwidth;
    profile_.bw_bs_mb_s = cfg_.storage.read_bandwidth_mb_s;
    profile_.bw_inst_mb_s = cfg_.link.bandwidth_mb_s;
  }

  ~AppSim() {
    for (auto& c : instances_) transport_.detach(c->id());
  }

  /// Fires keep-alive, pre-warm and controller timers due before `t`.
  void run_timers_before(Millis t, bool allow_reload = true) {
    while (true) {
      if (loaded_) {
        Millis unload_at = last_activity_ + cfg_.idle_timeout;
        if (controller_ && next_window_ <= unload_at) {
          if (next_window_ >= t) return;
          on_window(next_window_);
        } else {
          if (unload_at >= t) return;
          unload(unload_at);
        }
      } else if (prewarm_at_ && allow_reload && *prewarm_at_ < t) {
        reload_and_prewarm(*prewarm_at_, t);
      } else {
        return;
      }
    }
  }

  void handle(const TraceEvent& e) {
    clock_.advance_to(e.time);
    Millis wait{0};
    if (!loaded_) {
      // Cold start: pay the load and skip pre-warm for this load.
      load(e.time);
      wait = cfg_.bandwidth.t_load;
    } else if (ready_at_ > e.time) {
      wait = ready_at_ - e.time;
    }
    sync_instances(e.time);

    auto open = open_.find(e.func);
    if (e.op == TraceOp::kInvoke || open == open_.end() || find_instance(open->second.instance) == nullptr) {
      open = start_invocation(e, wait);
    }
    auto& rec = out_.invocations[open->second.record];
    if (e.op != TraceOp::kInvoke) {
      access(e, rec, *find_instance(open->second.instance));
    }
    Millis end = rec.arrival + rec.latency;
    last_invocation_end_ = last_invocation_end_ ? std::max(*last_invocation_end_, end) : end;
    last_activity_ = std::max(last_activity_, end);
  }

  void finish() { run_timers_before(kForever, false); }

  std::uint64_t storage_ops() const { return storage_.stats().operations() - seeded_ops_; }
  std::uint64_t dead_letters() const { return dead_letters_; }
  std::uint64_t loads() const { return loads_; }
  std::uint64_t prewarm_objects() const { return prewarm_objects_; }
  std::uint64_t prewarm_bytes() const { return prewarm_bytes_; }
  std::string controller_log() const { return "time_ms,source,votes,delta,instances\n" + controller_rows_; }

 private:
  struct Open {
    std::size_t record;
    CacheletId instance;
  };

  Cachelet* find_instance(const CacheletId& id) {
    for (auto& c : instances_) {
      if (c->id() == id) return c.get();
    }
    return nullptr;
  }

  std::map<std::string, Open>::iterator start_invocation(const TraceEvent& e, Millis wait) {
    auto& c = *instances_[rr_++ % instances_.size()];
    InvocationRecord rec;
    rec.app = app_;
    rec.func = e.func;
    rec.arrival = e.time;
    rec.instance = c.id().value;
    rec.cold = wait.count() > 0;
    rec.wait = wait;
    rec.latency = wait + cfg_.exec_time(e.func);
    rec.baseline = rec.latency;
    if (last_invocation_end_) hist_.add(e.time - *last_invocation_end_);
    load_had_invocation_ = true;
    ++window_invocations_;
    out_.invocations.push_back(std::move(rec));
    inflight_.push_back(out_.invocations.size() - 1);
    return open_.insert_or_assign(e.func, Open{out_.invocations.size() - 1, c.id()}).first;
  }

  void access(const TraceEvent& e, InvocationRecord& rec, Cachelet& c) {
    const ObjectKey& key = *e.key;
    Charge charge;
    AccessRecord row{e.time, app_, e.func, c.id().value, "", key, 0, "", "", Millis{0}};
    Millis baseline{0};
    if (e.op == TraceOp::kRead) {
      if (!storage_.exists(key)) seed_object(key, e.size);
      auto [object, cls] = read(c, key, e.size, charge);
      auto size = object.size();
      auto& m = out_.metrics;
      ++m.reads;
      ++m.class_counts[static_cast<std::size_t>(cls)];
      m.bytes_requested += size;
      if (cls == AccessClass::kLocalHit || cls == AccessClass::kRemoteHit) {
        m.bytes_from_cache += size;
      } else {
        m.bytes_from_storage += size;
      }
      baseline = cfg_.storage.read_cost(size);
      ++rec.reads;
      row.op = "read";
      row.size = size;
      row.access_class = access_class_name(cls);
      row.version = object.version.hex();
    } else {
      auto bytes = Blob::pattern(key_seed(key, seed_ + ++writes_), e.size);
      auto version = c.write(key, bytes, charge);
      ++out_.metrics.writes;
      out_.metrics.bytes_written += e.size;
      baseline = cfg_.storage.write_cost(e.size);
      ++rec.writes;
      row.op = "write";
      row.size = e.size;
      row.version = version.hex();
    }
    ++out_.metrics.baseline_storage_ops;
    rec.data += charge.total();
    rec.latency += charge.total();
    rec.baseline += baseline;
    row.latency = charge.total();
    out_.accesses.push_back(std::move(row));
  }

  ReadResult read(Cachelet& c, const ObjectKey& key, std::uint64_t size, Charge& charge) {
    if (controller_ && cfg_.bandwidth_scaling && c.owns(key) && !c.contains(key)) {
      auto live = static_cast<unsigned>(instances_.size());
      unsigned fanout = plan_fanout(size, profile_, live, cfg_.max_instances);
      if (fanout > 1) {
        if (fanout > live) {
          // Ask for the missing instances right away and wait for them.
          auto outcome = controller_->request(clock_.now(), {VoteSource::kBandwidth,
                                                             static_cast<int>(fanout - live)});
          if (outcome.applied > 0) {
            charge.add(controller_->t_load());
            controller_->tick(clock_.now() + controller_->t_load());
            sync_instances(clock_.now());
          }
        }
        std::vector<CacheletId> helpers;
        for (auto& other : instances_) {
          if (helpers.size() + 1 >= fanout) break;
          if (other.get() != &c) helpers.push_back(other->id());
        }
        if (!helpers.empty()) {
          auto object = parallel_fetch(c, key, helpers, charge);
          c.record_external_read(object, AccessClass::kLocalMiss);
          return {std::move(object), AccessClass::kLocalMiss};
        }
      }
    }
    return c.read(key, charge);
  }

  void seed_object(const ObjectKey& key, std::uint64_t size) {
    Charge ignored;
    auto before = storage_.stats().operations();
    storage_.put(key, Blob::pattern(key_seed(key, seed_), size), ignored);
    seeded_ops_ += storage_.stats().operations() - before;
  }

  void add_instance(Millis now) {
    CacheletId id{app_ + "-" + std::to_string(instance_seq_++)};
    CacheletConfig cc{cfg_.cache_capacity, cfg_.mode, cfg_.policy};
    auto c = std::make_unique<Cachelet>(id, cc, storage_, transport_, membership_, clock_,
                                        seed_ + 0x9E3779B97F4A7C15ULL * instance_seq_);
    c->set_drop_listener([this](const CacheletId& who, const ObjectKey& key, DropReason reason) {
      AccessRecord row{clock_.now(), app_, "", who.value,
                       reason == DropReason::kEvicted ? "evict" : "too-large",
                       key, 0, "", "", Millis{0}};
      out_.accesses.push_back(std::move(row));
    });
    transport_.attach(id, *c);
    membership_.update([&](const MembershipView& v) { return add_cachelet(v, id, now); });
    instances_.push_back(std::move(c));
  }

  void remove_newest() {
    auto& c = *instances_.back();
    Charge ignored;
    c.flush_async(ignored);
    dead_letters_ += c.dead_letters().size();
    membership_.update([&](const MembershipView& v) { return remove_cachelet(v, c.id()); });
    transport_.detach(c.id());
    instances_.pop_back();
  }

  void sync_instances(Millis now) {
    if (!controller_) return;
    controller_->tick(now);
    unsigned want = std::max(1u, controller_->state().current);
    while (instances_.size() < want) add_instance(now);
    while (instances_.size() > want) remove_newest();
  }

  void load(Millis now) {
    loaded_ = true;
    ready_at_ = now + cfg_.bandwidth.t_load;
    last_activity_ = ready_at_;
    load_had_invocation_ = false;
    prewarm_at_.reset();
    rr_ = 0;
    open_.clear();
    inflight_.clear();
    window_invocations_ = 0;
    ++loads_;
    unsigned start = cfg_.scaling_enabled ? cfg_.min_instances : 1;
    for (unsigned i = 0; i < start; ++i) add_instance(now);
    if (cfg_.scaling_enabled) {
      ControllerState state;
      state.current = start;
      state.min_instances = cfg_.min_instances;
      state.max_instances = cfg_.max_instances;
      controller_.emplace(state, cfg_.bandwidth.t_load);
      next_window_ = ready_at_ + cfg_.controller_window;
    }
  }

  void unload(Millis now) {
    clock_.advance_to(now);
    Charge ignored;  // the load daemon works off the request path
    for (auto& c : instances_) {
      c->flush_async(ignored);
      dead_letters_ += c->dead_letters().size();
      if (load_had_invocation_) snapshots_.push_back(snapshot_on_unload(*c, now, ignored));
    }
    while (!instances_.empty()) {
      membership_.update([&](const MembershipView& v) { return remove_cachelet(v, instances_.back()->id()); });
      transport_.detach(instances_.back()->id());
      instances_.pop_back();
    }
    if (controller_) {
      auto log = controller_->log_csv();
      controller_rows_ += log.substr(log.find('\n') + 1);
      controller_.reset();
    }
    loaded_ = false;
    constexpr std::size_t kMaxSnapshots = 256;
    if (snapshots_.size() > kMaxSnapshots) {
      snapshots_.erase(snapshots_.begin(), snapshots_.end() - kMaxSnapshots);
    }
    if (cfg_.reload_before_invocation && load_had_invocation_ && last_invocation_end_) {
      auto d = keep_alive_decide(hist_, *last_invocation_end_, cfg_.idle_timeout,
                                 cfg_.idle_percentile, cfg_.prewarm_lead);
      if (d.prewarm_at) {
        prewarm_at_ = std::max(*d.prewarm_at, now);
        predicted_period_ = *d.predicted_next - *last_invocation_end_;
      }
    }
  }

  void reload_and_prewarm(Millis at, Millis next_arrival) {
    load(at);
    clock_.advance_to(ready_at_);
    if (!cfg_.prewarm_enabled) return;
    auto window = merge_window(snapshots_, cfg_.prewarm, ready_at_, predicted_period_);
    auto candidates = select_prewarm(window, cfg_.prewarm);
    for (auto& c : instances_) {
      auto result = prewarm(*c, candidates, ready_at_, next_arrival);
      if (result.finished_at > std::max(ready_at_, next_arrival)) {
        throw std::logic_error("pre-warm overlapped an invocation");
      }
      prewarm_objects_ += result.loaded;
      prewarm_bytes_ += result.bytes;
      last_activity_ = std::max(last_activity_, result.finished_at);
    }
  }

  void on_window(Millis at) {
    clock_.advance_to(at);
    sync_instances(at);
    std::uint64_t busy = 0;
    std::vector<std::size_t> still;
    for (auto i : inflight_) {
      const auto& rec = out_.invocations[i];
      if (rec.arrival + rec.latency > at) {
        ++busy;
        still.push_back(i);
      }
    }
    inflight_.swap(still);
    std::vector<ScalingVote> votes{
        compute_vote(busy, static_cast<unsigned>(instances_.size()), window_invocations_)};
    for (auto& c : instances_) votes.push_back(cache_size_vote(*c));
    controller_->query(at, votes);
    sync_instances(at);
    Charge ignored;
    for (auto& c : instances_) c->flush_async(ignored);
    window_invocations_ = 0;
    next_window_ = at + cfg_.controller_window;
  }

  std::string app_;
  const ReplayConfig& cfg_;
  std::uint64_t seed_;
  ReplayResult& out_;
  BandwidthProfile profile_;

  SimClock clock_;
  MemoryStorage storage_;
  LocalTransport transport_;
  MembershipService membership_;
  std::vector<std::unique_ptr<Cachelet>> instances_;
  std::uint64_t instance_seq_ = 0;
  std::size_t rr_ = 0;
  std::optional<ScaleController> controller_;
  std::string controller_rows_;

  bool loaded_ = false;
  bool load_had_invocation_ = false;
  Millis ready_at_{0};
  Millis last_activity_{0};
  Millis next_window_{0};
  std::optional<Millis> prewarm_at_;
  std::optional<Millis> predicted_period_;
  std::optional<Millis> last_invocation_end_;
  IdleHistogram hist_;
  std::vector<AccessMetadata> snapshots_;

  std::map<std::string, Open> open_;
  std::vector<std::size_t> inflight_;
  std::uint64_t window_invocations_ = 0;
  std::uint64_t writes_ = 0;

  std::uint64_t seeded_ops_ = 0;
  std::uint64_t dead_letters_ = 0;
  std::uint64_t loads_ = 0;
  std::uint64_t prewarm_objects_ = 0;
  std::uint64_t prewarm_bytes_ = 0;
};

}  // namespace

ReplayResult replay(const std::vector<TraceEvent>& trace, const ReplayConfig& config,
                    std::uint64_t seed) {
  config.validate();
  ReplayResult result;
  std::map<std::string, std::unique_ptr<AppSim>> apps;
  Millis last{0};
  for (const auto& e : trace) {
    if (e.time < last) {
      throw Error(Errc::kMalformedTrace, "line " + std::to_string(e.line) + ": time goes backwards");
    }
    last = e.time;
    if (e.op != TraceOp::kInvoke && !e.key) {
      throw Error(Errc::kMalformedTrace, "line " + std::to_string(e.line) + ": missing key");
    }
    auto& sim = apps[e.app];
    if (!sim) sim = std::make_unique<AppSim>(e.app, config, seed, result);
    sim->run_timers_before(e.time);
    sim->handle(e);
  }

  auto& m = result.metrics;
  for (auto& [name, sim] : apps) {
    sim->finish();
    m.storage_ops += sim->storage_ops();
    m.dead_letters += sim->dead_letters();
    m.loads += sim->loads();
    m.prewarm_objects += sim->prewarm_objects();
    m.bytes_prewarmed += sim->prewarm_bytes();
    result.controller_logs[name] = sim->controller_log();
  }

  std::vector<Millis> latencies;
  std::vector<Millis> improvements;
  Millis total{0};
  Millis baseline_total{0};
  for (const auto& rec : result.invocations) {
    ++m.invocations;
    if (rec.cold) ++m.cold_starts;
    latencies.push_back(rec.latency);
    total += rec.latency;
    baseline_total += rec.baseline;
    if (rec.baseline.count() > 0) {
      improvements.push_back(Millis{(rec.baseline - rec.latency) / rec.baseline * 100.0});
    }
  }
  if (m.invocations > 0) {
    m.mean_latency = total / static_cast<double>(m.invocations);
    m.baseline_mean_latency = baseline_total / static_cast<double>(m.invocations);
  }
  m.p50_latency = nearest_rank(latencies, 0.50);
  m.p99_latency = nearest_rank(latencies, 0.99);
  if (m.baseline_mean_latency.count() > 0) {
    m.improvement_pct = (m.baseline_mean_latency - m.mean_latency) / m.baseline_mean_latency * 100.0;
  }
  m.median_improvement_pct = nearest_rank(improvements, 0.50).count();
  auto n = static_cast<double>(m.invocations);
  m.cost = estimate_cost(n, m.mean_latency.count() / 1000.0, config.function_memory_gb,
                         static_cast<double>(m.storage_ops), 0, config.cost);
  m.baseline_cost = estimate_cost(n, m.baseline_mean_latency.count() / 1000.0,
                                  config.function_memory_gb,
                                  static_cast<double>(m.baseline_storage_ops), 0, config.cost);
  return result;
}

std::string metrics_csv(const RunMetrics& m) {
  std::ostringstream out;
  out << "metric,value\n";
  auto row = [&](const char* name, const std::string& value) { out << name << ',' << value << '\n'; };
  auto count = [&](const char* name, std::uint64_t v) { row(name, std::to_string(v)); };
  count("invocations", m.invocations);
  count("cold_starts", m.cold_starts);
  count("loads", m.loads);
  count("reads", m.reads);
  count("writes", m.writes);
  count("local_hits", m.class_counts[0]);
  count("remote_hits", m.class_counts[1]);
  count("local_misses", m.class_counts[2]);
  count("remote_misses", m.class_counts[3]);
  count("bytes_requested", m.bytes_requested);
  count("bytes_from_storage", m.bytes_from_storage);
  count("bytes_from_cache", m.bytes_from_cache);
  count("bytes_written", m.bytes_written);
  count("prewarm_objects", m.prewarm_objects);
  count("bytes_prewarmed", m.bytes_prewarmed);
  count("storage_ops", m.storage_ops);
  count("baseline_storage_ops", m.baseline_storage_ops);
  count("dead_letters", m.dead_letters);
  row("mean_latency_ms", fixed(m.mean_latency.count()));
  row("p50_latency_ms", fixed(m.p50_latency.count()));
  row("p99_latency_ms", fixed(m.p99_latency.count()));
  row("baseline_mean_latency_ms", fixed(m.baseline_mean_latency.count()));
  row("improvement_pct", fixed(m.improvement_pct, 2));
  row("median_improvement_pct", fixed(m.median_improvement_pct, 2));
  row("cost_usd", fixed(m.cost, 8));
  row("baseline_cost_usd", fixed(m.baseline_cost, 8));
  return out.str();
}

std::string invocations_csv(const std::vector<InvocationRecord>& invocations) {
  std::ostringstream out;
  out << "app_id,func_id,arrival_ms,instance,cold,wait_ms,reads,writes,data_ms,latency_ms,"
         "baseline_ms\n";
  for (const auto& r : invocations) {
    out << r.app << ',' << r.func << ',' << fixed(r.arrival.count()) << ',' << r.instance << ','
        << (r.cold ? 1 : 0) << ',' << fixed(r.wait.count()) << ',' << r.reads << ',' << r.writes
        << ',' << fixed(r.data.count()) << ',' << fixed(r.latency.count()) << ','
        << fixed(r.baseline.count()) << '\n';
  }
  return out.str();
}

std::string accesses_csv(const std::vector<AccessRecord>& accesses) {
  std::ostringstream out;
  out << "time_ms,app_id,func_id,instance,op,key,size_bytes,class,version,latency_ms\n";
  for (const auto& r : accesses) {
    out << fixed(r.time.count()) << ',' << r.app << ',' << r.func << ',' << r.instance << ','
        << r.op << ',' << r.key.path() << ',' << r.size << ',' << r.access_class << ','
        << r.version << ',' << fixed(r.latency.count()) << '\n';
  }
  return out.str();
}

void write_replay_outputs(const ReplayResult& result, const std::filesystem::path& dir,
                          bool with_accesses) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kIo, "cannot write " + (dir / name).string());
    out << body;
  };
  write("metrics.csv", metrics_csv(result.metrics));
  write("invocations.csv", invocations_csv(result.invocations));
  for (const auto& [app, log] : result.controller_logs) write("controller-" + app + ".csv", log);
  if (with_accesses) write("accesses.csv", accesses_csv(result.accesses));
}

}  // namespace faast
