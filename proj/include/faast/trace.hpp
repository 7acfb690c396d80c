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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "faast/types.hpp"

namespace faast {

enum class TraceOp { kInvoke, kRead, kWrite };

std::string_view trace_op_name(TraceOp op) noexcept;

struct TraceEvent {
  Millis time{0};
  std::string app;
  std::string func;
  TraceOp op = TraceOp::kInvoke;
  std::optional<ObjectKey> key;  // set for reads and writes
  std::uint64_t size = 0;
  std::size_t line = 0;          // 1-based source line, 0 if generated
};

inline constexpr std::string_view kTraceHeader = "time_ms,app_id,func_id,op,key,size_bytes";

/// Parses a trace CSV. Throws kMalformedTrace naming the offending line for
/// a wrong header, bad field, missing key, or time going backwards.
std::vector<TraceEvent> parse_trace(std::string_view text);
std::vector<TraceEvent> load_trace(const std::filesystem::path& path);
std::string format_trace(const std::vector<TraceEvent>& events);

enum class TracePattern { kReuse, kScan, kMixed };

TracePattern parse_trace_pattern(std::string_view name);

struct TraceGenOptions {
  TracePattern pattern = TracePattern::kReuse;
  std::uint64_t seed = 1;
  std::size_t invocations = 200;  // per app
};

/// Synthetic traces: `reuse` reads a small hot set on every invocation,
/// `scan` never reads a key twice, `mixed` runs several apps that pass
/// outputs between functions and share a hot model object.
std::vector<TraceEvent> generate_trace(const TraceGenOptions& options);

}  // namespace faast
