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

#include "faast/blob.hpp"

#include <algorithm>
#include <array>
#include <cstring>

#include "faast/error.hpp"

namespace faast {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t pattern_word(std::uint64_t seed, std::uint64_t word_index) {
  return splitmix64(seed ^ splitmix64(word_index));
}

std::byte pattern_byte(std::uint64_t seed, std::uint64_t index) {
  return static_cast<std::byte>(pattern_word(seed, index / 8) >> (8 * (index % 8)));
}

void fill_pattern(std::uint64_t seed, std::uint64_t start, std::span<std::byte> out) {
  std::uint64_t pos = start;
  std::size_t i = 0;
  while (i < out.size() && pos % 8 != 0) out[i++] = pattern_byte(seed, pos++);
  while (out.size() - i >= 8) {
    std::uint64_t w = pattern_word(seed, pos / 8);
    for (int b = 0; b < 8; ++b) out[i + b] = static_cast<std::byte>(w >> (8 * b));
    i += 8;
    pos += 8;
  }
  while (i < out.size()) out[i++] = pattern_byte(seed, pos++);
}

}  // namespace

Blob Blob::copy_of(std::span<const std::byte> bytes) {
  return adopt(std::vector<std::byte>(bytes.begin(), bytes.end()));
}

Blob Blob::from_string(std::string_view text) {
  return copy_of(std::as_bytes(std::span(text.data(), text.size())));
}

Blob Blob::adopt(std::vector<std::byte> bytes) {
  Blob b;
  b.length_ = bytes.size();
  if (b.length_ > 0) b.buffer_ = std::make_shared<const std::vector<std::byte>>(std::move(bytes));
  return b;
}

Blob Blob::pattern(std::uint64_t seed, std::uint64_t size) {
  Blob b;
  b.seed_ = seed;
  b.length_ = size;
  return b;
}

Blob Blob::slice(std::uint64_t offset, std::uint64_t length) const {
  if (offset > length_ || length > length_ - offset) {
    throw Error(Errc::kRangeOutOfBounds, "slice [" + std::to_string(offset) + ", +" +
                                             std::to_string(length) + ") of " +
                                             std::to_string(length_) + " bytes");
  }
  Blob b = *this;
  b.offset_ = offset_ + offset;
  b.length_ = length;
  if (length == 0) b.buffer_.reset();
  return b;
}

std::byte Blob::at(std::uint64_t index) const {
  if (index >= length_) throw Error(Errc::kRangeOutOfBounds, "byte index past end");
  if (buffer_) return (*buffer_)[offset_ + index];
  return pattern_byte(seed_, offset_ + index);
}

void Blob::copy_to(std::span<std::byte> out) const {
  if (out.size() != length_) throw Error(Errc::kInvalidArgument, "copy_to size mismatch");
  if (length_ == 0) return;
  if (buffer_) {
    std::memcpy(out.data(), buffer_->data() + offset_, length_);
  } else {
    fill_pattern(seed_, offset_, out);
  }
}

std::vector<std::byte> Blob::to_vector() const {
  std::vector<std::byte> out(length_);
  copy_to(out);
  return out;
}

std::string Blob::to_string() const {
  std::string out(length_, '\0');
  copy_to(std::as_writable_bytes(std::span(out.data(), out.size())));
  return out;
}

bool Blob::same_view(const Blob& other) const noexcept {
  if (length_ != other.length_) return false;
  if (length_ == 0) return true;
  if (buffer_ || other.buffer_) return buffer_ == other.buffer_ && offset_ == other.offset_;
  return seed_ == other.seed_ && offset_ == other.offset_;
}

Blob Blob::concat(std::span<const Blob> parts) {
  std::vector<const Blob*> nonempty;
  std::uint64_t total = 0;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    nonempty.push_back(&p);
    total += p.size();
  }
  if (nonempty.empty()) return Blob();
  if (nonempty.size() == 1) return *nonempty.front();

  bool adjacent = true;
  for (std::size_t i = 1; i < nonempty.size() && adjacent; ++i) {
    const Blob& prev = *nonempty[i - 1];
    const Blob& cur = *nonempty[i];
    bool same_source = prev.buffer_ ? prev.buffer_ == cur.buffer_
                                    : (!cur.buffer_ && prev.seed_ == cur.seed_);
    adjacent = same_source && prev.offset_ + prev.length_ == cur.offset_;
  }
  if (adjacent) {
    Blob joined = *nonempty.front();
    joined.length_ = total;
    return joined;
  }

  std::vector<std::byte> out(total);
  std::uint64_t pos = 0;
  for (const Blob* p : nonempty) {
    p->copy_to(std::span(out).subspan(pos, p->size()));
    pos += p->size();
  }
  return adopt(std::move(out));
}

bool operator==(const Blob& a, const Blob& b) {
  if (a.size() != b.size()) return false;
  if (a.same_view(b)) return true;
  if (a.buffer_ && b.buffer_) {
    return std::memcmp(a.buffer_->data() + a.offset_, b.buffer_->data() + b.offset_, a.size()) == 0;
  }
  constexpr std::uint64_t kChunk = 1 << 16;
  std::array<std::byte, kChunk> left{};
  std::array<std::byte, kChunk> right{};
  for (std::uint64_t pos = 0; pos < a.size(); pos += kChunk) {
    std::uint64_t n = std::min(kChunk, a.size() - pos);
    a.slice(pos, n).copy_to(std::span(left).first(n));
    b.slice(pos, n).copy_to(std::span(right).first(n));
    if (std::memcmp(left.data(), right.data(), n) != 0) return false;
  }
  return true;
}

}  // namespace faast
