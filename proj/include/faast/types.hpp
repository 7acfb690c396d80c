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

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "faast/blob.hpp"

namespace faast {

/// Simulated time and latency. Fractional milliseconds are kept so that
/// small transfers are not rounded away.
using Millis = std::chrono::duration<double, std::milli>;

inline constexpr std::uint64_t kKB = 1000;
inline constexpr std::uint64_t kMB = 1000 * kKB;
inline constexpr std::uint64_t kGB = 1000 * kMB;

/// Time to move `bytes` at `mb_per_s` (decimal megabytes per second).
Millis transfer_time(std::uint64_t bytes, double mb_per_s);

using Hash256 = std::array<std::uint8_t, 32>;

Hash256 sha256(std::string_view data);
std::string to_hex(std::span<const std::uint8_t> bytes);

/// Storage-service path of an object: `namespace/name`.
struct ObjectKey {
  std::string ns;
  std::string name;

  ObjectKey() = default;
  ObjectKey(std::string ns_in, std::string name_in);

  /// Parses `namespace/name`, splitting at the first '/'.
  static ObjectKey parse(std::string_view path);

  std::string path() const { return ns + "/" + name; }

  friend auto operator<=>(const ObjectKey&, const ObjectKey&) = default;
  friend bool operator==(const ObjectKey&, const ObjectKey&) = default;
};

struct VersionToken {
  std::array<std::uint8_t, 16> bytes{};

  bool is_null() const noexcept;
  std::string hex() const;
  static VersionToken from_hex(std::string_view hex);

  friend auto operator<=>(const VersionToken&, const VersionToken&) = default;
  friend bool operator==(const VersionToken&, const VersionToken&) = default;
};

/// Seeded generator of fresh version tokens. Not thread-safe.
class VersionSource {
 public:
  explicit VersionSource(std::uint64_t seed) : rng_(seed) {}
  /// Sources with different domains never share a stream, even when they
  /// are given the same seed.
  VersionSource(std::string_view domain, std::uint64_t seed);
  VersionToken next();

 private:
  std::mt19937_64 rng_;
};

struct VersionedObject {
  ObjectKey key;
  VersionToken version;
  Blob bytes;

  std::uint64_t size() const noexcept { return bytes.size(); }
};

struct CacheletId {
  std::string value;

  friend auto operator<=>(const CacheletId&, const CacheletId&) = default;
  friend bool operator==(const CacheletId&, const CacheletId&) = default;
};

enum class AccessClass : std::uint8_t { kLocalHit, kRemoteHit, kLocalMiss, kRemoteMiss };
inline constexpr std::size_t kAccessClassCount = 4;

std::string_view access_class_name(AccessClass cls) noexcept;

enum class WriteTarget : std::uint8_t { kStorage, kOwner, kLocal };
enum class WriteMode : std::uint8_t { kSync, kAsync };
enum class ReadTarget : std::uint8_t { kStorage, kOwner, kLocal };

/// One of the six supported (write target, write mode, read target) rows.
class ConsistencyMode {
 public:
  /// Throws kInvalidArgument for combinations outside the supported six.
  static ConsistencyMode make(WriteTarget target, WriteMode mode, ReadTarget read);
  /// Accepts names like `storage-sync-storage`.
  static ConsistencyMode parse(std::string_view name);

  static ConsistencyMode storage_sync_storage();
  static ConsistencyMode owner_sync_owner();
  static ConsistencyMode owner_async_owner();
  static ConsistencyMode owner_sync_local();
  static ConsistencyMode local_sync_local();
  static ConsistencyMode local_async_local();

  /// All six rows, strongest first.
  static std::array<ConsistencyMode, 6> all();

  WriteTarget write_target() const noexcept { return target_; }
  WriteMode write_mode() const noexcept { return mode_; }
  ReadTarget read_target() const noexcept { return read_; }
  std::string name() const;

  friend bool operator==(const ConsistencyMode&, const ConsistencyMode&) = default;

 private:
  ConsistencyMode(WriteTarget t, WriteMode m, ReadTarget r) : target_(t), mode_(m), read_(r) {}

  WriteTarget target_;
  WriteMode mode_;
  ReadTarget read_;
};

enum class ConsistencyLevel { kStrong, kEventual, kWeak, kNone };
enum class FaultTolerance { kHigh, kMedium, kLow };

struct ModeProperties {
  int performance_rank;  // 1 = slowest tier, 4 = fastest
  ConsistencyLevel consistency;
  FaultTolerance fault_tolerance;

  friend bool operator==(const ModeProperties&, const ModeProperties&) = default;
};

ModeProperties mode_properties(const ConsistencyMode& mode) noexcept;

struct CostParams {
  double gbs_rate = 1.6667e-5;   // $ per GB-second of function time
  double vm_rate = 1.0e-1;       // $ per VM-second
  double storage_op_rate = 1e-6; // $ per storage operation
};

/// Dollar cost of a run. All inputs must be non-negative.
double estimate_cost(double invocations, double mean_duration_s, double mem_gb,
                     double storage_ops, double extra_vm_seconds, const CostParams& params);

/// Accumulates the simulated latency of one logical operation.
///
/// `transfer` is the part of `total` spent pushing bytes over the caller's
/// own inbound link; parallel fetches serialize that part across streams.
class Charge {
 public:
  void add(Millis d) { total_ += d; }
  void add_transfer(Millis d) {
    total_ += d;
    transfer_ += d;
  }
  void merge(const Charge& other) {
    total_ += other.total_;
    transfer_ += other.transfer_;
  }

  Millis total() const noexcept { return total_; }
  Millis transfer() const noexcept { return transfer_; }

 private:
  Millis total_{0};
  Millis transfer_{0};
};

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Millis now() const = 0;
};

/// Virtual clock driven explicitly by the simulator.
class SimClock final : public Clock {
 public:
  Millis now() const override { return now_; }
  void advance_to(Millis t) {
    if (t > now_) now_ = t;
  }
  void advance_by(Millis d) { now_ += d; }

 private:
  Millis now_{0};
};

class WallClock final : public Clock {
 public:
  Millis now() const override;

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace faast
