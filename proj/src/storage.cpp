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

#include "faast/storage.hpp"

#include <fstream>

#include "faast/error.hpp"

namespace faast {

Millis StorageModel::read_cost(std::uint64_t bytes, unsigned streams) const {
  double bw = read_bandwidth_mb_s;
  if (shared_bandwidth && streams > 1) bw /= streams;
  return read_base + transfer_time(bytes, bw);
}

Millis StorageModel::write_cost(std::uint64_t bytes) const {
  return write_base + transfer_time(bytes, write_bandwidth_mb_s);
}

void StorageModel::validate() const {
  if (read_base.count() <= 0 || write_base.count() <= 0 || probe.count() <= 0 ||
      read_bandwidth_mb_s <= 0 || write_bandwidth_mb_s <= 0) {
    throw Error(Errc::kInvalidArgument, "storage model values must be positive");
  }
}

Storage::Storage(StorageModel model, std::uint64_t seed) : model_(model), versions_("storage", seed) {
  model_.validate();
}

void Storage::check_available() const {
  if (!available_) throw Error(Errc::kBackendUnavailable, "remote storage unavailable");
}

VersionToken Storage::put(const ObjectKey& key, Blob bytes, Charge& charge) {
  VersionToken version;
  {
    std::lock_guard lock(mu_);
    version = versions_.next();
  }
  put_versioned(VersionedObject{key, version, std::move(bytes)}, charge);
  return version;
}

void Storage::put_versioned(const VersionedObject& object, Charge& charge) {
  check_available();
  if (object.version.is_null()) throw Error(Errc::kInvalidArgument, "null version");
  store(object);
  charge.add(model_.write_cost(object.size()));
  std::lock_guard lock(mu_);
  ++stats_.puts;
  stats_.bytes_written += object.size();
}

VersionedObject Storage::get(const ObjectKey& key, Charge& charge) {
  check_available();
  auto object = load(key);
  if (!object) throw Error(Errc::kNotFound, key.path());
  charge.add(model_.read_cost(object->size(), streams_));
  std::lock_guard lock(mu_);
  ++stats_.gets;
  stats_.bytes_read += object->size();
  return *std::move(object);
}

RangeRead Storage::get_range(const ObjectKey& key, std::uint64_t offset, std::uint64_t length,
                             Charge& charge) {
  check_available();
  auto range = load_range(key, offset, length);
  if (!range) throw Error(Errc::kNotFound, key.path());
  charge.add(model_.read_cost(length, streams_));
  std::lock_guard lock(mu_);
  ++stats_.range_gets;
  stats_.bytes_read += length;
  return *std::move(range);
}

VersionToken Storage::probe_version(const ObjectKey& key, Charge& charge) {
  return stat(key, charge).version;
}

ObjectInfo Storage::stat(const ObjectKey& key, Charge& charge) {
  check_available();
  auto info = load_info(key);
  if (!info) throw Error(Errc::kNotFound, key.path());
  charge.add(model_.probe);
  std::lock_guard lock(mu_);
  ++stats_.probes;
  return *info;
}

bool Storage::exists(const ObjectKey& key) const { return load_info(key).has_value(); }

StorageStats Storage::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

std::optional<ObjectInfo> Storage::load_info(const ObjectKey& key) const {
  auto object = load(key);
  if (!object) return std::nullopt;
  return ObjectInfo{object->version, object->size()};
}

std::optional<RangeRead> Storage::load_range(const ObjectKey& key, std::uint64_t offset,
                                             std::uint64_t length) const {
  auto object = load(key);
  if (!object) return std::nullopt;
  // One load gives a single version snapshot for the whole range.
  return RangeRead{object->bytes.slice(offset, length), object->version};
}

Storage::StreamGroup::StreamGroup(Storage& storage, unsigned streams)
    : storage_(storage), previous_(storage.streams_.exchange(streams < 1 ? 1 : streams)) {}

Storage::StreamGroup::~StreamGroup() { storage_.streams_ = previous_; }

// ---------------------------------------------------------------------------

std::size_t MemoryStorage::object_count() const {
  std::lock_guard lock(records_mu_);
  return records_.size();
}

void MemoryStorage::store(const VersionedObject& object) {
  std::lock_guard lock(records_mu_);
  records_.insert_or_assign(object.key, object);
}

std::optional<VersionedObject> MemoryStorage::load(const ObjectKey& key) const {
  std::lock_guard lock(records_mu_);
  auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kVersionHeader = 16;

}  // namespace

FileStorage::FileStorage(std::filesystem::path dir, StorageModel model, std::uint64_t seed)
    : Storage(model, seed), dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(Errc::kIo, "cannot create " + dir_.string() + ": " + ec.message());
}

std::filesystem::path FileStorage::file_for(const ObjectKey& key) const {
  return dir_ / (to_hex(sha256(key.path())) + ".blob");
}

void FileStorage::store(const VersionedObject& object) {
  auto target = file_for(object.key);
  auto tmp = target;
  tmp += ".tmp";
  std::lock_guard lock(io_mu_);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kIo, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(object.version.bytes.data()), kVersionHeader);
    auto bytes = object.bytes.to_vector();
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);  // atomic replace of the record
  if (ec) throw Error(Errc::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::optional<ObjectInfo> FileStorage::load_info(const ObjectKey& key) const {
  auto path = file_for(key);
  std::lock_guard lock(io_mu_);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  ObjectInfo info;
  in.read(reinterpret_cast<char*>(info.version.bytes.data()), kVersionHeader);
  if (!in) throw Error(Errc::kIo, "truncated version header in " + path.string());
  info.size = std::filesystem::file_size(path) - kVersionHeader;
  return info;
}

std::optional<VersionedObject> FileStorage::load(const ObjectKey& key) const {
  auto path = file_for(key);
  std::lock_guard lock(io_mu_);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  VersionedObject object;
  object.key = key;
  in.read(reinterpret_cast<char*>(object.version.bytes.data()), kVersionHeader);
  if (!in) throw Error(Errc::kIo, "truncated version header in " + path.string());
  std::vector<std::byte> payload(std::filesystem::file_size(path) - kVersionHeader);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!in && !payload.empty()) throw Error(Errc::kIo, "short read from " + path.string());
  object.bytes = Blob::adopt(std::move(payload));
  return object;
}

std::optional<RangeRead> FileStorage::load_range(const ObjectKey& key, std::uint64_t offset,
                                                 std::uint64_t length) const {
  auto path = file_for(key);
  std::lock_guard lock(io_mu_);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  RangeRead range;
  in.read(reinterpret_cast<char*>(range.version.bytes.data()), kVersionHeader);
  if (!in) throw Error(Errc::kIo, "truncated version header in " + path.string());
  std::uint64_t size = std::filesystem::file_size(path) - kVersionHeader;
  if (offset > size || length > size - offset) {
    throw Error(Errc::kRangeOutOfBounds, key.path());
  }
  std::vector<std::byte> payload(length);
  in.seekg(static_cast<std::streamoff>(kVersionHeader + offset));
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(length));
  if (!in && length > 0) throw Error(Errc::kIo, "short read from " + path.string());
  range.bytes = Blob::adopt(std::move(payload));
  return range;
}

}  // namespace faast
