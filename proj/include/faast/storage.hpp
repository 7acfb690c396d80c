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

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>

#include "faast/types.hpp"

namespace faast {

/// Latency/bandwidth model of the remote blob store.
struct StorageModel {
  Millis read_base{20};
  Millis write_base{10};
  Millis probe{5};
  double read_bandwidth_mb_s = 90;
  double write_bandwidth_mb_s = 120;
  /// When set, concurrent streams split the read bandwidth instead of each
  /// getting the full per-stream rate.
  bool shared_bandwidth = false;

  Millis read_cost(std::uint64_t bytes, unsigned streams = 1) const;
  Millis write_cost(std::uint64_t bytes) const;

  /// Throws kInvalidArgument unless every latency and bandwidth is positive.
  void validate() const;
};

struct ObjectInfo {
  VersionToken version;
  std::uint64_t size = 0;
};

struct RangeRead {
  Blob bytes;
  VersionToken version;
};

struct StorageStats {
  std::uint64_t gets = 0;
  std::uint64_t range_gets = 0;
  std::uint64_t puts = 0;
  std::uint64_t probes = 0;
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;

  std::uint64_t operations() const { return gets + range_gets + puts + probes; }
};

/// Versioned remote storage. Every call charges its modeled latency to the
/// caller's Charge. Subclasses supply the actual record keeping.
class Storage {
 public:
  Storage(StorageModel model, std::uint64_t seed);
  virtual ~Storage() = default;

  Storage(const Storage&) = delete;
  Storage& operator=(const Storage&) = delete;

  /// Stores `bytes` under a fresh version.
  VersionToken put(const ObjectKey& key, Blob bytes, Charge& charge);
  /// Stores an object whose version was assigned by the writer.
  void put_versioned(const VersionedObject& object, Charge& charge);

  VersionedObject get(const ObjectKey& key, Charge& charge);
  RangeRead get_range(const ObjectKey& key, std::uint64_t offset, std::uint64_t length,
                      Charge& charge);
  /// Version check without payload transfer.
  VersionToken probe_version(const ObjectKey& key, Charge& charge);
  ObjectInfo stat(const ObjectKey& key, Charge& charge);

  /// Uncharged existence check for simulator bookkeeping.
  bool exists(const ObjectKey& key) const;

  /// Fault injection: while unavailable every call throws kBackendUnavailable.
  void set_available(bool available) { available_ = available; }
  bool available() const { return available_; }

  const StorageModel& model() const noexcept { return model_; }
  StorageStats stats() const;

  /// Scope during which reads are treated as `streams` concurrent streams.
  class StreamGroup {
   public:
    StreamGroup(Storage& storage, unsigned streams);
    ~StreamGroup();
    StreamGroup(const StreamGroup&) = delete;
    StreamGroup& operator=(const StreamGroup&) = delete;

   private:
    Storage& storage_;
    unsigned previous_;
  };

 protected:
  virtual void store(const VersionedObject& object) = 0;
  virtual std::optional<VersionedObject> load(const ObjectKey& key) const = 0;
  virtual std::optional<ObjectInfo> load_info(const ObjectKey& key) const;
  virtual std::optional<RangeRead> load_range(const ObjectKey& key, std::uint64_t offset,
                                              std::uint64_t length) const;

 private:
  void check_available() const;

  StorageModel model_;
  std::atomic<bool> available_{true};
  std::atomic<unsigned> streams_{1};
  mutable std::mutex mu_;  // guards versions_ and stats_
  VersionSource versions_;
  StorageStats stats_;
};

/// In-memory simulated backend.
class MemoryStorage final : public Storage {
 public:
  explicit MemoryStorage(StorageModel model = {}, std::uint64_t seed = 1)
      : Storage(model, seed) {}

  std::size_t object_count() const;

 protected:
  void store(const VersionedObject& object) override;
  std::optional<VersionedObject> load(const ObjectKey& key) const override;

 private:
  mutable std::mutex records_mu_;
  std::map<ObjectKey, VersionedObject> records_;
};

/// Filesystem backend: `<dir>/<sha256(path)>.blob`, each file a 16-byte
/// version header followed by the payload.
class FileStorage final : public Storage {
 public:
  FileStorage(std::filesystem::path dir, StorageModel model = {}, std::uint64_t seed = 1);

  std::filesystem::path file_for(const ObjectKey& key) const;

 protected:
  void store(const VersionedObject& object) override;
  std::optional<VersionedObject> load(const ObjectKey& key) const override;
  std::optional<ObjectInfo> load_info(const ObjectKey& key) const override;
  std::optional<RangeRead> load_range(const ObjectKey& key, std::uint64_t offset,
                                      std::uint64_t length) const override;

 private:
  std::filesystem::path dir_;
  mutable std::mutex io_mu_;
};

}  // namespace faast
