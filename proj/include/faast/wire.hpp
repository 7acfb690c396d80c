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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "faast/types.hpp"

// Inter-cachelet frame layout. All integers are big-endian.
//
//   u32 length        bytes that follow this field
//   u8  type          request type, or (request type | 0x80) for a response
//   u8  status        responses only
//   ... fields        per type, in this order:
//
//   type          request fields          response fields
//   GET        01  key                     version payload
//   GET_VERSION 02 key                     version
//   PUT        03  key version payload     version
//   RANGE_GET  04  key range               version payload
//   HEARTBEAT  05  key (sender id)         -
//
//   key     = u16 length + UTF-8 bytes
//   version = 16 raw bytes
//   payload = u32 length + bytes
//   range   = u64 offset + u64 length

namespace faast {

enum class MessageType : std::uint8_t {
  kGet = 0x01,
  kGetVersion = 0x02,
  kPut = 0x03,
  kRangeGet = 0x04,
  kHeartbeat = 0x05,
};

inline constexpr std::uint8_t kResponseBit = 0x80;
inline constexpr std::size_t kMaxKeyBytes = 0xFFFF;
inline constexpr std::uint64_t kMaxPayloadBytes = 0xFFFFFFFFULL;

enum class WireStatus : std::uint8_t {
  kOk = 0x00,           // served from the responder's cache
  kFetched = 0x01,      // responder had to go to remote storage
  kNotFound = 0x02,
  kError = 0x03,        // responder failed, e.g. storage unavailable
  kOutOfRange = 0x04,
};

struct WireMessage {
  MessageType type = MessageType::kGet;
  bool response = false;
  WireStatus status = WireStatus::kOk;
  std::string key;
  VersionToken version;
  Blob payload;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;

  static WireMessage get(std::string key);
  static WireMessage get_version(std::string key);
  static WireMessage put(std::string key, VersionToken version, Blob payload);
  static WireMessage range_get(std::string key, std::uint64_t offset, std::uint64_t length);
  static WireMessage heartbeat(std::string sender);

  /// Response skeleton for `request` with every field defaulted.
  static WireMessage reply_to(const WireMessage& request, WireStatus status);

  friend bool operator==(const WireMessage& a, const WireMessage& b);
};

bool is_valid_utf8(std::string_view text) noexcept;

/// Full frame including the length prefix. Throws kMalformedFrame when the
/// message cannot be represented (oversized key or payload, invalid UTF-8).
std::vector<std::byte> encode(const WireMessage& message);

/// Decodes one complete frame. Throws kMalformedFrame on any defect.
WireMessage decode(std::span<const std::byte> frame);

/// Total frame size announced by a 4-byte prefix, or nullopt if fewer than
/// four bytes are available.
std::optional<std::size_t> frame_size(std::span<const std::byte> prefix);

}  // namespace faast
