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

#include <memory>
#include <sstream>

#include "faast/error.hpp"
#include "faast/harness.hpp"

namespace faast {
namespace {

/// A fixed set of cachelets over one storage and an in-process transport.
struct Cluster {
  Cluster(unsigned n, const ConsistencyMode& mode, const StorageModel& storage_model,
          const LinkModel& link, std::uint64_t seed)
      : storage(storage_model, seed), transport(link) {
    for (unsigned i = 0; i < n; ++i) {
      CacheletId id{"c" + std::to_string(i)};
      CacheletConfig config{64 * kMB, mode, EvictionPolicy::lru()};
      members.push_back(std::make_unique<Cachelet>(id, config, storage, transport, membership,
                                                   clock, seed + 1 + i));
      transport.attach(id, *members.back());
      membership.update([&](const MembershipView& v) { return add_cachelet(v, id); });
    }
  }

  ~Cluster() {
    for (auto& c : members) transport.detach(c->id());
  }

  SimClock clock;
  MemoryStorage storage;
  LocalTransport transport;
  MembershipService membership;
  std::vector<std::unique_ptr<Cachelet>> members;
};

std::uint64_t parse_counter(const Blob& bytes) {
  auto text = bytes.to_string();
  try {
    return std::stoull(text);
  } catch (const std::logic_error&) {
    throw Error(Errc::kInvalidArgument, "counter object holds '" + text + "'");
  }
}

}  // namespace

CounterResult run_counter(unsigned instances, std::uint64_t target, const ConsistencyMode& mode,
                          const StorageModel& storage, const LinkModel& link,
                          std::uint64_t seed) {
  if (instances == 0 || target == 0) {
    throw Error(Errc::kInvalidArgument, "counter needs at least one instance and increment");
  }
  Cluster cluster(instances, mode, storage, link, seed);
  const ObjectKey key("counter", "value");
  Charge setup;
  cluster.storage.put(key, Blob::from_string("0"), setup);

  CounterResult result;
  for (std::uint64_t i = 0; i < target; ++i) {
    auto& c = *cluster.members[i % instances];
    Charge charge;
    auto value = parse_counter(c.read(key, charge).object.bytes);
    c.write(key, Blob::from_string(std::to_string(value + 1)), charge);
    result.e2e += charge.total();
    cluster.clock.advance_by(charge.total());
  }
  Charge drain;
  for (auto& c : cluster.members) c->flush_async(drain);
  result.final_value = parse_counter(cluster.storage.get(key, drain).bytes);
  result.inconsistencies = result.final_value > target ? result.final_value - target
                                                       : target - result.final_value;
  result.per_request = result.e2e / static_cast<double>(target);
  return result;
}

std::vector<SweepRow> bw_sweep(const std::vector<std::uint64_t>& sizes,
                               const std::vector<unsigned>& fanouts,
                               const BandwidthProfile& profile, bool loaded,
                               StorageModel storage, LinkModel link) {
  if (sizes.empty() || fanouts.empty()) {
    throw Error(Errc::kInvalidArgument, "sweep needs at least one size and one fanout");
  }
  profile.validate();
  storage.read_bandwidth_mb_s = profile.bw_bs_mb_s;
  link.bandwidth_mb_s = profile.bw_inst_mb_s;
  std::vector<SweepRow> rows;
  for (auto size : sizes) {
    for (auto fanout : fanouts) {
      if (fanout == 0) throw Error(Errc::kInvalidArgument, "fanout must be at least 1");
      Cluster cluster(fanout, ConsistencyMode::storage_sync_storage(), storage, link, size);
      const ObjectKey key("sweep", "object");
      Charge setup;
      cluster.storage.put(key, Blob::pattern(size, size), setup);
      std::vector<CacheletId> helpers;
      for (unsigned i = 1; i < fanout; ++i) helpers.push_back(cluster.members[i]->id());
      Charge charge;
      auto object = parallel_fetch(*cluster.members[0], key, helpers, charge);
      if (object.size() != size) throw std::logic_error("parallel fetch lost bytes");
      Millis fetch = charge.total();
      if (!loaded && fanout > 1) fetch += profile.t_load;
      rows.push_back({size, fanout, loaded, fetch, t_dr(size, fanout, profile, loaded)});
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "size_bytes,fanout,loaded,fetch_ms,t_dr_ms\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%llu,%u,%d,%.3f,%.3f\n",
                  static_cast<unsigned long long>(r.size), r.fanout, r.loaded ? 1 : 0,
                  r.fetch.count(), r.model.count());
    out << buf;
  }
  return out.str();
}

}  // namespace faast
