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

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <functional>
#include <sstream>

#include "faast/error.hpp"
#include "faast/harness.hpp"

namespace faast {
namespace {

using Setter = std::function<void(const std::string&)>;

[[noreturn]] void bad_value(const std::string& where, const std::string& value) {
  throw Error(Errc::kMalformedConfig, where + ": bad value '" + value + "'");
}

double to_double(const std::string& where, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) bad_value(where, v);
    return d;
  } catch (const std::logic_error&) {
    bad_value(where, v);
  }
}

unsigned to_unsigned(const std::string& where, const std::string& v) {
  double d = to_double(where, v);
  if (d < 0 || d != static_cast<unsigned>(d)) bad_value(where, v);
  return static_cast<unsigned>(d);
}

bool to_bool(const std::string& where, const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  bad_value(where, v);
}

}  // namespace

std::uint64_t parse_bytes(std::string_view text) {
  std::string s(text);
  std::uint64_t scale = 1;
  if (!s.empty()) {
    switch (s.back()) {
      case 'K':
      case 'k':
        scale = kKB;
        break;
      case 'M':
      case 'm':
        scale = kMB;
        break;
      case 'G':
      case 'g':
        scale = kGB;
        break;
      default:
        break;
    }
    if (scale != 1) s.pop_back();
  }
  try {
    std::size_t used = 0;
    double d = std::stod(s, &used);
    if (used != s.size() || d < 0) throw std::invalid_argument(s);
    return static_cast<std::uint64_t>(d * static_cast<double>(scale) + 0.5);
  } catch (const std::logic_error&) {
    throw Error(Errc::kInvalidArgument, "bad byte count '" + std::string(text) + "'");
  }
}

Millis ReplayConfig::exec_time(const std::string& func) const {
  auto it = exec.find(func);
  return it == exec.end() ? default_exec : it->second;
}

void ReplayConfig::validate() const {
  storage.validate();
  bandwidth.validate();
  prewarm.validate();
  if (!(link.bandwidth_mb_s > 0) || link.message_latency.count() < 0) {
    throw Error(Errc::kMalformedConfig, "transport latency and bandwidth must be positive");
  }
  if (min_instances == 0 || min_instances > max_instances) {
    throw Error(Errc::kMalformedConfig, "controller needs 1 <= min_instances <= max_instances");
  }
  if (controller_window.count() <= 0 || histogram_bin.count() <= 0 || idle_timeout.count() < 0) {
    throw Error(Errc::kMalformedConfig, "window, bin and idle timeout must be positive");
  }
  if (!(idle_percentile > 0 && idle_percentile <= 1)) {
    throw Error(Errc::kMalformedConfig, "keepalive percentile must be in (0, 1]");
  }
  if (policy.threshold == 0) throw Error(Errc::kMalformedConfig, "size threshold must be positive");
}

ReplayConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::kMalformedConfig, e.what());
  }

  ReplayConfig c;
  std::string policy_name = "lru";
  std::uint64_t threshold = c.policy.threshold;
  auto ms = [](Millis& field) {
    return [&field](const std::string& v) { field = Millis{to_double("duration", v)}; };
  };
  auto num = [](double& field) { return [&field](const std::string& v) { field = to_double("number", v); }; };
  auto flag = [](bool& field) { return [&field](const std::string& v) { field = to_bool("flag", v); }; };
  auto count = [](unsigned& field) {
    return [&field](const std::string& v) { field = to_unsigned("count", v); };
  };

  std::map<std::string, std::map<std::string, Setter>> keys{
      {"storage",
       {{"read_base_ms", ms(c.storage.read_base)},
        {"write_base_ms", ms(c.storage.write_base)},
        {"probe_ms", ms(c.storage.probe)},
        {"read_bw_mb_s", num(c.storage.read_bandwidth_mb_s)},
        {"write_bw_mb_s", num(c.storage.write_bandwidth_mb_s)},
        {"shared_bandwidth", flag(c.storage.shared_bandwidth)}}},
      {"transport",
       {{"message_latency_ms", ms(c.link.message_latency)},
        {"bandwidth_mb_s", num(c.link.bandwidth_mb_s)}}},
      {"cache",
       {{"capacity", [&](const std::string& v) { c.cache_capacity = parse_bytes(v); }},
        {"mode", [&](const std::string& v) { c.mode = ConsistencyMode::parse(v); }},
        {"policy", [&](const std::string& v) { policy_name = v; }},
        {"size_threshold", [&](const std::string& v) { threshold = parse_bytes(v); }}}},
      {"prewarm",
       {{"enabled", flag(c.prewarm_enabled)},
        {"hit_rate_threshold", num(c.prewarm.hit_rate_threshold)},
        {"merge_window",
         [&](const std::string& v) { c.prewarm.merge_window = to_unsigned("merge_window", v); }}}},
      {"keepalive",
       {{"idle_timeout_ms", ms(c.idle_timeout)},
        {"bin_ms", ms(c.histogram_bin)},
        {"percentile", num(c.idle_percentile)},
        {"lead_ms", ms(c.prewarm_lead)},
        {"reload", flag(c.reload_before_invocation)}}},
      {"controller",
       {{"enabled", flag(c.scaling_enabled)},
        {"bandwidth_scaling", flag(c.bandwidth_scaling)},
        {"window_ms", ms(c.controller_window)},
        {"min_instances", count(c.min_instances)},
        {"max_instances", count(c.max_instances)},
        {"t_load_ms", ms(c.bandwidth.t_load)}}},
      {"function", {{"default_exec_ms", ms(c.default_exec)}}},
      {"cost",
       {{"gbs_rate", num(c.cost.gbs_rate)},
        {"vm_rate", num(c.cost.vm_rate)},
        {"storage_op_rate", num(c.cost.storage_op_rate)},
        {"memory_gb", num(c.function_memory_gb)}}},
  };

  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw Error(Errc::kMalformedConfig, "key '" + section + "' is outside any section");
    }
    if (section == "exec") {
      for (const auto& [func, node] : body) {
        c.exec[func] = Millis{to_double("exec." + func, node.data())};
      }
      continue;
    }
    auto sec = keys.find(section);
    if (sec == keys.end()) throw Error(Errc::kMalformedConfig, "unknown section [" + section + "]");
    for (const auto& [key, node] : body) {
      auto setter = sec->second.find(key);
      if (setter == sec->second.end()) {
        throw Error(Errc::kMalformedConfig, "unknown key '" + key + "' in [" + section + "]");
      }
      try {
        setter->second(node.data());
      } catch (const Error& e) {
        throw Error(Errc::kMalformedConfig, section + "." + key + ": " + e.what());
      }
    }
  }
  try {
    c.policy = EvictionPolicy::parse(policy_name, threshold);
    c.bandwidth.bw_bs_mb_s = c.storage.read_bandwidth_mb_s;
    c.bandwidth.bw_inst_mb_s = c.link.bandwidth_mb_s;
    c.validate();
  } catch (const Error& e) {
    if (e.code() == Errc::kMalformedConfig) throw;
    throw Error(Errc::kMalformedConfig, e.what());
  }
  return c;
}

ReplayConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace faast
