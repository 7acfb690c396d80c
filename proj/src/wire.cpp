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

#include "faast/wire.hpp"

#include <cstring>

#include "faast/error.hpp"

namespace faast {
namespace {

class Writer {
 public:
  explicit Writer(std::vector<std::byte>& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(static_cast<std::byte>(v)); }
  void u16(std::uint16_t v) { be(v, 2); }
  void u32(std::uint32_t v) { be(v, 4); }
  void u64(std::uint64_t v) { be(v, 8); }

  void key(const std::string& k) {
    if (k.size() > kMaxKeyBytes) throw Error(Errc::kMalformedFrame, "key longer than 65535 bytes");
    if (!is_valid_utf8(k)) throw Error(Errc::kMalformedFrame, "key is not valid UTF-8");
    u16(static_cast<std::uint16_t>(k.size()));
    auto bytes = std::as_bytes(std::span(k.data(), k.size()));
    out_.insert(out_.end(), bytes.begin(), bytes.end());
  }

  void version(const VersionToken& v) {
    for (auto b : v.bytes) u8(b);
  }

  void payload(const Blob& p) {
    if (p.size() > kMaxPayloadBytes) throw Error(Errc::kMalformedFrame, "payload too large");
    u32(static_cast<std::uint32_t>(p.size()));
    auto pos = out_.size();
    out_.resize(pos + p.size());
    p.copy_to(std::span(out_).subspan(pos, p.size()));
  }

 private:
  void be(std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  std::vector<std::byte>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::byte> in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(be(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(be(4)); }
  std::uint64_t u64() { return be(8); }

  std::string key() {
    auto n = u16();
    auto bytes = take(n);
    std::string k(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    if (!is_valid_utf8(k)) throw Error(Errc::kMalformedFrame, "key is not valid UTF-8");
    return k;
  }

  VersionToken version() {
    VersionToken v;
    auto bytes = take(v.bytes.size());
    std::memcpy(v.bytes.data(), bytes.data(), v.bytes.size());
    return v;
  }

  Blob payload() { return Blob::copy_of(take(u32())); }

  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::byte> take(std::size_t n) {
    if (in_.size() - pos_ < n) throw Error(Errc::kMalformedFrame, "frame truncated");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint64_t be(int width) {
    auto bytes = take(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (auto b : bytes) v = v << 8 | static_cast<std::uint8_t>(b);
    return v;
  }

  std::span<const std::byte> in_;
  std::size_t pos_ = 0;
};

bool known_type(std::uint8_t t) { return t >= 0x01 && t <= 0x05; }

bool known_status(std::uint8_t s) { return s <= 0x04; }

}  // namespace

WireMessage WireMessage::get(std::string key) {
  WireMessage m;
  m.type = MessageType::kGet;
  m.key = std::move(key);
  return m;
}

WireMessage WireMessage::get_version(std::string key) {
  WireMessage m;
  m.type = MessageType::kGetVersion;
  m.key = std::move(key);
  return m;
}

WireMessage WireMessage::put(std::string key, VersionToken version, Blob payload) {
  WireMessage m;
  m.type = MessageType::kPut;
  m.key = std::move(key);
  m.version = version;
  m.payload = std::move(payload);
  return m;
}

WireMessage WireMessage::range_get(std::string key, std::uint64_t offset, std::uint64_t length) {
  WireMessage m;
  m.type = MessageType::kRangeGet;
  m.key = std::move(key);
  m.offset = offset;
  m.length = length;
  return m;
}

WireMessage WireMessage::heartbeat(std::string sender) {
  WireMessage m;
  m.type = MessageType::kHeartbeat;
  m.key = std::move(sender);
  return m;
}

WireMessage WireMessage::reply_to(const WireMessage& request, WireStatus status) {
  WireMessage m;
  m.type = request.type;
  m.response = true;
  m.status = status;
  return m;
}

bool operator==(const WireMessage& a, const WireMessage& b) {
  return a.type == b.type && a.response == b.response && a.status == b.status &&
         a.key == b.key && a.version == b.version && a.payload == b.payload &&
         a.offset == b.offset && a.length == b.length;
}

bool is_valid_utf8(std::string_view text) noexcept {
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= text.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = cp << 6 | (cc & 0x3F);
    }
    // Overlong forms, surrogates, and values past U+10FFFF.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

std::vector<std::byte> encode(const WireMessage& m) {
  std::vector<std::byte> out;
  out.reserve(32 + m.key.size() + m.payload.size());
  Writer w(out);
  w.u32(0);  // patched below
  w.u8(static_cast<std::uint8_t>(m.type) | (m.response ? kResponseBit : 0));
  if (m.response) {
    w.u8(static_cast<std::uint8_t>(m.status));
    switch (m.type) {
      case MessageType::kGet:
      case MessageType::kRangeGet:
        w.version(m.version);
        w.payload(m.payload);
        break;
      case MessageType::kGetVersion:
      case MessageType::kPut:
        w.version(m.version);
        break;
      case MessageType::kHeartbeat:
        break;
    }
  } else {
    w.key(m.key);
    switch (m.type) {
      case MessageType::kPut:
        w.version(m.version);
        w.payload(m.payload);
        break;
      case MessageType::kRangeGet:
        w.u64(m.offset);
        w.u64(m.length);
        break;
      default:
        break;
    }
  }
  if (out.size() - 4 > 0xFFFFFFFFULL) throw Error(Errc::kMalformedFrame, "frame too large");
  auto len = static_cast<std::uint32_t>(out.size() - 4);
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::byte>(len >> (8 * (3 - i)));
  return out;
}

std::optional<std::size_t> frame_size(std::span<const std::byte> prefix) {
  if (prefix.size() < 4) return std::nullopt;
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len = len << 8 | static_cast<std::uint8_t>(prefix[i]);
  return static_cast<std::size_t>(len) + 4;
}

WireMessage decode(std::span<const std::byte> frame) {
  auto total = frame_size(frame);
  if (!total) throw Error(Errc::kMalformedFrame, "missing length prefix");
  if (*total != frame.size()) {
    throw Error(Errc::kMalformedFrame, "length prefix says " + std::to_string(*total - 4) +
                                           " bytes, frame carries " +
                                           std::to_string(frame.size() - 4));
  }
  Reader r(frame.subspan(4));
  auto raw_type = r.u8();
  WireMessage m;
  m.response = (raw_type & kResponseBit) != 0;
  std::uint8_t base = raw_type & static_cast<std::uint8_t>(~kResponseBit);
  if (!known_type(base)) throw Error(Errc::kMalformedFrame, "unknown message type");
  m.type = static_cast<MessageType>(base);
  if (m.response) {
    auto status = r.u8();
    if (!known_status(status)) throw Error(Errc::kMalformedFrame, "unknown status");
    m.status = static_cast<WireStatus>(status);
    switch (m.type) {
      case MessageType::kGet:
      case MessageType::kRangeGet:
        m.version = r.version();
        m.payload = r.payload();
        break;
      case MessageType::kGetVersion:
      case MessageType::kPut:
        m.version = r.version();
        break;
      case MessageType::kHeartbeat:
        break;
    }
  } else {
    m.key = r.key();
    switch (m.type) {
      case MessageType::kPut:
        m.version = r.version();
        m.payload = r.payload();
        break;
      case MessageType::kRangeGet:
        m.offset = r.u64();
        m.length = r.u64();
        break;
      default:
        break;
    }
  }
  if (!r.done()) throw Error(Errc::kMalformedFrame, "trailing bytes after message body");
  return m;
}

}  // namespace faast
