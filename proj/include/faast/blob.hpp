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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace faast {

/// Immutable byte payload with cheap, zero-copy slicing.
///
/// A blob is either backed by a shared heap buffer or is a *pattern* blob:
/// a deterministic pseudo-random byte stream identified by a seed that is
/// never materialized unless someone asks for contiguous bytes. Pattern
/// blobs let the simulator move multi-hundred-megabyte objects around
/// without allocating them. Slices of either kind share the source.
class Blob {
 public:
  Blob() = default;

  static Blob copy_of(std::span<const std::byte> bytes);
  static Blob from_string(std::string_view text);
  static Blob adopt(std::vector<std::byte> bytes);
  static Blob pattern(std::uint64_t seed, std::uint64_t size);

  std::uint64_t size() const noexcept { return length_; }
  bool empty() const noexcept { return length_ == 0; }
  bool is_pattern() const noexcept { return !buffer_ && length_ > 0; }

  /// Zero-copy view of [offset, offset + length). Throws kRangeOutOfBounds.
  Blob slice(std::uint64_t offset, std::uint64_t length) const;

  std::byte at(std::uint64_t index) const;

  /// Writes the blob's bytes into `out`, which must be exactly size() long.
  void copy_to(std::span<std::byte> out) const;

  std::vector<std::byte> to_vector() const;
  std::string to_string() const;

  /// True when both blobs view the same bytes of the same source.
  bool same_view(const Blob& other) const noexcept;

  /// Joins parts in order. Adjacent slices of one source are rejoined
  /// without copying; anything else is materialized into a new buffer.
  static Blob concat(std::span<const Blob> parts);

  friend bool operator==(const Blob& a, const Blob& b);

 private:
  std::shared_ptr<const std::vector<std::byte>> buffer_;
  std::uint64_t seed_ = 0;
  std::uint64_t offset_ = 0;
  std::uint64_t length_ = 0;
};

}  // namespace faast
