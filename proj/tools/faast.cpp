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

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "faast/error.hpp"
#include "faast/harness.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

void emit(const std::string& body, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw faast::Error(faast::Errc::kIo, "cannot write " + path);
  out << body;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative serverless cache simulator"};
  app.require_subcommand(1);

  std::string trace_path, config_path, out_dir;
  std::uint64_t seed = 1;
  bool with_accesses = false;
  auto* replay_cmd = app.add_subcommand("replay", "Replay a trace on the virtual clock");
  replay_cmd->add_option("--trace", trace_path, "Trace CSV")->required();
  replay_cmd->add_option("--config", config_path, "INI config (defaults if omitted)");
  replay_cmd->add_option("--out", out_dir, "Output directory")->required();
  replay_cmd->add_option("--seed", seed, "Random seed");
  replay_cmd->add_flag("--accesses", with_accesses, "Also write accesses.csv");

  unsigned instances = 5;
  std::uint64_t target = 1000;
  std::string mode_name = "storage-sync-storage";
  std::string counter_out;
  auto* counter_cmd = app.add_subcommand("counter", "Shared-counter consistency workload");
  counter_cmd->add_option("--instances", instances, "Number of cachelets");
  counter_cmd->add_option("--target", target, "Increments to issue");
  counter_cmd->add_option("--mode", mode_name, "Consistency mode name, or 'all'");
  counter_cmd->add_option("--out", counter_out, "Output CSV (stdout if omitted)");
  counter_cmd->add_option("--seed", seed, "Random seed");

  std::string sizes = "400K,40M,400M,800M", fanouts = "1,2,4,8", sweep_out;
  bool loaded = false, cold = false;
  double t_load_ms = 1500, bw_bs = 90, bw_inst = 500;
  auto* sweep_cmd = app.add_subcommand("bw-sweep", "Parallel fetch latency by size and fanout");
  sweep_cmd->add_option("--sizes", sizes, "Comma-separated sizes (K/M/G suffixes)");
  sweep_cmd->add_option("--fanouts", fanouts, "Comma-separated instance counts");
  auto* loaded_flag = sweep_cmd->add_flag("--loaded", loaded, "Helper instances already running");
  sweep_cmd->add_flag("--cold", cold, "Helper instances must be started")->excludes(loaded_flag);
  sweep_cmd->add_option("--t-load-ms", t_load_ms, "Instance load time");
  sweep_cmd->add_option("--bw-bs", bw_bs, "Storage bandwidth per stream, MB/s");
  sweep_cmd->add_option("--bw-inst", bw_inst, "Instance link bandwidth, MB/s");
  sweep_cmd->add_option("--out", sweep_out, "Output CSV (stdout if omitted)");

  std::string pattern = "reuse", trace_out;
  std::size_t invocations = 200;
  auto* gen_cmd = app.add_subcommand("gen-trace", "Write a synthetic trace");
  gen_cmd->add_option("--pattern", pattern, "reuse, scan or mixed");
  gen_cmd->add_option("--out", trace_out, "Trace CSV path")->required();
  gen_cmd->add_option("--seed", seed, "Random seed");
  gen_cmd->add_option("--invocations", invocations, "Invocations per app");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*replay_cmd) {
      auto config = config_path.empty() ? faast::ReplayConfig{} : faast::load_config(config_path);
      auto trace = faast::load_trace(trace_path);
      auto result = faast::replay(trace, config, seed);
      faast::write_replay_outputs(result, out_dir, with_accesses);
    } else if (*counter_cmd) {
      std::vector<faast::ConsistencyMode> modes;
      if (mode_name == "all") {
        auto all = faast::ConsistencyMode::all();
        modes.assign(all.begin(), all.end());
      } else {
        modes.push_back(faast::ConsistencyMode::parse(mode_name));
      }
      std::ostringstream out;
      out << "mode,instances,target,final_value,inconsistencies,e2e_ms,per_request_ms\n";
      for (const auto& mode : modes) {
        auto r = faast::run_counter(instances, target, mode, {}, {}, seed);
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s,%u,%llu,%llu,%llu,%.3f,%.3f\n", mode.name().c_str(),
                      instances, static_cast<unsigned long long>(target),
                      static_cast<unsigned long long>(r.final_value),
                      static_cast<unsigned long long>(r.inconsistencies), r.e2e.count(),
                      r.per_request.count());
        out << buf;
      }
      emit(out.str(), counter_out);
    } else if (*sweep_cmd) {
      std::vector<std::uint64_t> size_list;
      for (const auto& s : split_list(sizes)) size_list.push_back(faast::parse_bytes(s));
      std::vector<unsigned> fanout_list;
      for (const auto& f : split_list(fanouts)) fanout_list.push_back(static_cast<unsigned>(std::stoul(f)));
      faast::BandwidthProfile profile{faast::Millis{t_load_ms}, bw_bs, bw_inst};
      auto rows = faast::bw_sweep(size_list, fanout_list, profile, loaded || !cold);
      emit(faast::sweep_csv(rows), sweep_out);
    } else if (*gen_cmd) {
      faast::TraceGenOptions options{faast::parse_trace_pattern(pattern), seed, invocations};
      emit(faast::format_trace(faast::generate_trace(options)), trace_out);
    }
  } catch (const faast::Error& e) {
    std::cerr << "faast: " << faast::errc_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "faast: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
