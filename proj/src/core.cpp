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

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <random>
#include <vector>

#include "faast/error.hpp"
#include "faast/types.hpp"

namespace faast {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kEmptyMembership: return "EmptyMembership";
    case Errc::kDuplicateId: return "DuplicateId";
    case Errc::kUnknownId: return "UnknownId";
    case Errc::kBackendUnavailable: return "BackendUnavailable";
    case Errc::kNotFound: return "NotFound";
    case Errc::kRangeOutOfBounds: return "RangeOutOfBounds";
    case Errc::kOwnerUnreachable: return "OwnerUnreachable";
    case Errc::kMalformedFrame: return "MalformedFrame";
    case Errc::kCannotSatisfy: return "CannotSatisfy";
    case Errc::kMalformedTrace: return "MalformedTrace";
    case Errc::kMalformedConfig: return "MalformedConfig";
    case Errc::kIo: return "Io";
  }
  return "Unknown";
}

Millis transfer_time(std::uint64_t bytes, double mb_per_s) {
  if (mb_per_s <= 0) throw Error(Errc::kInvalidArgument, "bandwidth must be positive");
  return Millis(static_cast<double>(bytes) / (mb_per_s * static_cast<double>(kMB)) * 1000.0);
}

Hash256 sha256(std::string_view data) {
  Hash256 out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    throw Error(Errc::kInvalidArgument, "sha256 digest failed");
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ObjectKey

ObjectKey::ObjectKey(std::string ns_in, std::string name_in)
    : ns(std::move(ns_in)), name(std::move(name_in)) {
  if (ns.empty() || name.empty()) {
    throw Error(Errc::kInvalidArgument, "object key needs a namespace and a name");
  }
  if (ns.find('/') != std::string::npos) {
    throw Error(Errc::kInvalidArgument, "namespace may not contain '/': " + ns);
  }
}

ObjectKey ObjectKey::parse(std::string_view path) {
  auto slash = path.find('/');
  if (slash == std::string_view::npos) {
    throw Error(Errc::kInvalidArgument, "object path needs namespace/name: " + std::string(path));
  }
  return ObjectKey(std::string(path.substr(0, slash)), std::string(path.substr(slash + 1)));
}

// ---------------------------------------------------------------------------
// VersionToken

bool VersionToken::is_null() const noexcept {
  return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
}

std::string VersionToken::hex() const { return to_hex(bytes); }

VersionToken VersionToken::from_hex(std::string_view hex) {
  auto nibble = [&](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw Error(Errc::kInvalidArgument, "bad hex digit in version");
  };
  VersionToken v;
  if (hex.size() != v.bytes.size() * 2) {
    throw Error(Errc::kInvalidArgument, "version hex must be 32 digits");
  }
  for (std::size_t i = 0; i < v.bytes.size(); ++i) {
    v.bytes[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return v;
}

VersionSource::VersionSource(std::string_view domain, std::uint64_t seed) {
  auto h = sha256(domain);
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed),
                                   static_cast<std::uint32_t>(seed >> 32)};
  for (std::size_t i = 0; i < h.size(); i += 4) {
    std::uint32_t w;
    std::memcpy(&w, h.data() + i, 4);
    words.push_back(w);
  }
  std::seed_seq seq(words.begin(), words.end());
  rng_.seed(seq);
}

VersionToken VersionSource::next() {
  VersionToken v;
  do {
    std::uint64_t hi = rng_();
    std::uint64_t lo = rng_();
    std::memcpy(v.bytes.data(), &hi, 8);
    std::memcpy(v.bytes.data() + 8, &lo, 8);
  } while (v.is_null());  // null is reserved for "no version"
  return v;
}

std::string_view access_class_name(AccessClass cls) noexcept {
  switch (cls) {
    case AccessClass::kLocalHit: return "LH";
    case AccessClass::kRemoteHit: return "RH";
    case AccessClass::kLocalMiss: return "LM";
    case AccessClass::kRemoteMiss: return "RM";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// ConsistencyMode

namespace {

struct ModeRow {
  WriteTarget target;
  WriteMode mode;
  ReadTarget read;
  std::string_view name;
  ModeProperties props;
};

constexpr std::array<ModeRow, 6> kModeRows = {{
    {WriteTarget::kStorage, WriteMode::kSync, ReadTarget::kStorage, "storage-sync-storage",
     {1, ConsistencyLevel::kStrong, FaultTolerance::kHigh}},
    {WriteTarget::kOwner, WriteMode::kSync, ReadTarget::kOwner, "owner-sync-owner",
     {2, ConsistencyLevel::kStrong, FaultTolerance::kMedium}},
    {WriteTarget::kOwner, WriteMode::kAsync, ReadTarget::kOwner, "owner-async-owner",
     {2, ConsistencyLevel::kEventual, FaultTolerance::kMedium}},
    {WriteTarget::kOwner, WriteMode::kSync, ReadTarget::kLocal, "owner-sync-local",
     {3, ConsistencyLevel::kWeak, FaultTolerance::kMedium}},
    {WriteTarget::kLocal, WriteMode::kSync, ReadTarget::kLocal, "local-sync-local",
     {4, ConsistencyLevel::kNone, FaultTolerance::kLow}},
    {WriteTarget::kLocal, WriteMode::kAsync, ReadTarget::kLocal, "local-async-local",
     {4, ConsistencyLevel::kNone, FaultTolerance::kLow}},
}};

const ModeRow* find_row(WriteTarget t, WriteMode m, ReadTarget r) {
  for (const auto& row : kModeRows) {
    if (row.target == t && row.mode == m && row.read == r) return &row;
  }
  return nullptr;
}

}  // namespace

ConsistencyMode ConsistencyMode::make(WriteTarget target, WriteMode mode, ReadTarget read) {
  if (find_row(target, mode, read) == nullptr) {
    throw Error(Errc::kInvalidArgument, "unsupported consistency combination");
  }
  return ConsistencyMode(target, mode, read);
}

ConsistencyMode ConsistencyMode::parse(std::string_view name) {
  for (const auto& row : kModeRows) {
    if (row.name == name) return ConsistencyMode(row.target, row.mode, row.read);
  }
  throw Error(Errc::kInvalidArgument, "unknown consistency mode: " + std::string(name));
}

ConsistencyMode ConsistencyMode::storage_sync_storage() {
  return {WriteTarget::kStorage, WriteMode::kSync, ReadTarget::kStorage};
}
ConsistencyMode ConsistencyMode::owner_sync_owner() {
  return {WriteTarget::kOwner, WriteMode::kSync, ReadTarget::kOwner};
}
ConsistencyMode ConsistencyMode::owner_async_owner() {
  return {WriteTarget::kOwner, WriteMode::kAsync, ReadTarget::kOwner};
}
ConsistencyMode ConsistencyMode::owner_sync_local() {
  return {WriteTarget::kOwner, WriteMode::kSync, ReadTarget::kLocal};
}
ConsistencyMode ConsistencyMode::local_sync_local() {
  return {WriteTarget::kLocal, WriteMode::kSync, ReadTarget::kLocal};
}
ConsistencyMode ConsistencyMode::local_async_local() {
  return {WriteTarget::kLocal, WriteMode::kAsync, ReadTarget::kLocal};
}

std::array<ConsistencyMode, 6> ConsistencyMode::all() {
  return {storage_sync_storage(), owner_sync_owner(), owner_async_owner(),
          owner_sync_local(),     local_sync_local(), local_async_local()};
}

std::string ConsistencyMode::name() const {
  return std::string(find_row(target_, mode_, read_)->name);
}

ModeProperties mode_properties(const ConsistencyMode& mode) noexcept {
  return find_row(mode.write_target(), mode.write_mode(), mode.read_target())->props;
}

double estimate_cost(double invocations, double mean_duration_s, double mem_gb,
                     double storage_ops, double extra_vm_seconds, const CostParams& params) {
  for (double v : {invocations, mean_duration_s, mem_gb, storage_ops, extra_vm_seconds,
                   params.gbs_rate, params.vm_rate, params.storage_op_rate}) {
    if (v < 0) throw Error(Errc::kInvalidArgument, "cost inputs must be non-negative");
  }
  return invocations * mean_duration_s * mem_gb * params.gbs_rate +
         storage_ops * params.storage_op_rate + extra_vm_seconds * params.vm_rate;
}

Millis WallClock::now() const {
  return std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start_);
}

}  // namespace faast
