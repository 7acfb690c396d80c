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

#include "faast/trace.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include "faast/error.hpp"

namespace faast {

std::string_view trace_op_name(TraceOp op) noexcept {
  switch (op) {
    case TraceOp::kInvoke:
      return "invoke";
    case TraceOp::kRead:
      return "read";
    case TraceOp::kWrite:
      return "write";
  }
  return "?";
}

namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& what) {
  throw Error(Errc::kMalformedTrace, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
bool parse_value(std::string_view text, T& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

}  // namespace

std::vector<TraceEvent> parse_trace(std::string_view text) {
  std::vector<TraceEvent> events;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  double last_time = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kTraceHeader) bad_line(line_no, "expected header '" + std::string(kTraceHeader) + "'");
      header_seen = true;
      continue;
    }
    auto f = split_csv(line);
    if (f.size() != 6) bad_line(line_no, "expected 6 fields, got " + std::to_string(f.size()));
    TraceEvent e;
    e.line = line_no;
    double t;
    if (!parse_value(f[0], t) || t < 0) bad_line(line_no, "bad time '" + std::string(f[0]) + "'");
    if (t < last_time) bad_line(line_no, "time goes backwards");
    last_time = t;
    e.time = Millis{t};
    if (f[1].empty() || f[2].empty()) bad_line(line_no, "app_id and func_id are required");
    e.app = f[1];
    e.func = f[2];
    if (f[3] == "invoke") {
      e.op = TraceOp::kInvoke;
    } else if (f[3] == "read") {
      e.op = TraceOp::kRead;
    } else if (f[3] == "write") {
      e.op = TraceOp::kWrite;
    } else {
      bad_line(line_no, "unknown op '" + std::string(f[3]) + "'");
    }
    if (e.op != TraceOp::kInvoke) {
      try {
        e.key = ObjectKey::parse(f[4]);
      } catch (const Error& err) {
        bad_line(line_no, err.what());
      }
    }
    if (f[5].empty() && e.op == TraceOp::kInvoke) {
      e.size = 0;
    } else if (!parse_value(f[5], e.size)) {
      bad_line(line_no, "bad size '" + std::string(f[5]) + "'");
    }
    events.push_back(std::move(e));
  }
  if (!header_seen) throw Error(Errc::kMalformedTrace, "line 1: empty trace, header missing");
  return events;
}

std::vector<TraceEvent> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open trace " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str());
}

std::string format_trace(const std::vector<TraceEvent>& events) {
  std::ostringstream out;
  out << kTraceHeader << '\n';
  char t[64];
  for (const auto& e : events) {
    std::snprintf(t, sizeof(t), "%.0f", e.time.count());
    out << t << ',' << e.app << ',' << e.func << ',' << trace_op_name(e.op) << ','
        << (e.key ? e.key->path() : "") << ',' << e.size << '\n';
  }
  return out.str();
}

TracePattern parse_trace_pattern(std::string_view name) {
  if (name == "reuse") return TracePattern::kReuse;
  if (name == "scan") return TracePattern::kScan;
  if (name == "mixed") return TracePattern::kMixed;
  throw Error(Errc::kInvalidArgument, "unknown trace pattern '" + std::string(name) + "'");
}

namespace {

constexpr double kMinute = 60'000;

struct Gen {
  std::mt19937_64 rng;
  std::vector<TraceEvent> events;

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  std::uint64_t size_between(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
  }

  void add(double t, const std::string& app, const std::string& func, TraceOp op,
           std::optional<ObjectKey> key = std::nullopt, std::uint64_t size = 0) {
    events.push_back({Millis{std::floor(t)}, app, func, op, std::move(key), size, 0});
  }
};

void gen_reuse(Gen& g, const std::string& app, std::size_t invocations, double mean_gap_min) {
  std::vector<std::pair<ObjectKey, std::uint64_t>> hot;
  for (int i = 0; i < 6; ++i) {
    hot.emplace_back(ObjectKey(app, "hot-" + std::to_string(i)),
                     g.size_between(100 * kKB, 20 * kMB));
  }
  double t = 0;
  for (std::size_t n = 0; n < invocations; ++n) {
    t += g.uniform(0.5, 1.5) * mean_gap_min * kMinute;
    g.add(t, app, "f0", TraceOp::kInvoke);
    std::vector<std::size_t> picks{0, 1, 2, 3, 4, 5};
    std::shuffle(picks.begin(), picks.end(), g.rng);
    for (int r = 0; r < 4; ++r) {
      const auto& [key, size] = hot[picks[r]];
      g.add(t + 1 + r, app, "f0", TraceOp::kRead, key, size);
    }
  }
}

void gen_scan(Gen& g, const std::string& app, std::size_t invocations) {
  double t = 0;
  std::uint64_t next = 0;
  for (std::size_t n = 0; n < invocations; ++n) {
    t += g.uniform(0.5, 1.5) * 5 * kMinute;
    g.add(t, app, "f0", TraceOp::kInvoke);
    for (int r = 0; r < 3; ++r) {
      g.add(t + 1 + r, app, "f0", TraceOp::kRead, ObjectKey(app, "obj-" + std::to_string(next++)),
            g.size_between(10 * kKB, 5 * kMB));
    }
  }
}

void gen_pipeline(Gen& g, const std::string& app, std::size_t invocations, double mean_gap_min) {
  ObjectKey model(app, "model");
  std::uint64_t model_size = g.size_between(5 * kMB, 40 * kMB);
  double t = 0;
  for (std::size_t n = 0; n < invocations; ++n) {
    t += g.uniform(0.5, 1.5) * mean_gap_min * kMinute;
    ObjectKey out(app, "out-" + std::to_string(n));
    std::uint64_t out_size = g.size_between(1 * kKB, 2 * kMB);
    g.add(t, app, "produce", TraceOp::kInvoke);
    g.add(t + 1, app, "produce", TraceOp::kRead, model, model_size);
    g.add(t + 2, app, "produce", TraceOp::kWrite, out, out_size);
    g.add(t + 50, app, "consume", TraceOp::kInvoke);
    g.add(t + 51, app, "consume", TraceOp::kRead, out, out_size);
    g.add(t + 52, app, "consume", TraceOp::kRead, model, model_size);
  }
}

}  // namespace

std::vector<TraceEvent> generate_trace(const TraceGenOptions& options) {
  Gen g{std::mt19937_64(options.seed), {}};
  switch (options.pattern) {
    case TracePattern::kReuse:
      gen_reuse(g, "app0", options.invocations, 20);
      break;
    case TracePattern::kScan:
      gen_scan(g, "app0", options.invocations);
      break;
    case TracePattern::kMixed:
      gen_pipeline(g, "app0", options.invocations, 1);
      gen_pipeline(g, "app1", options.invocations, 15);
      gen_reuse(g, "app2", options.invocations, 60);
      break;
  }
  std::stable_sort(g.events.begin(), g.events.end(),
                   [](const TraceEvent& a, const TraceEvent& b) { return a.time < b.time; });
  return std::move(g.events);
}

}  // namespace faast
