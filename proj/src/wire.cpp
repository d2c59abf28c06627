#include "piedge/wire.hpp"

#include <cstring>
#include <limits>

namespace piedge::bus {

namespace {

void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::byte>((v >> shift) & 0xFF));
}

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::byte>(v >> 8));
  out.push_back(static_cast<std::byte>(v & 0xFF));
}

std::uint32_t get_u32(std::span<const std::byte> b) {
  return (std::to_integer<std::uint32_t>(b[0]) << 24) | (std::to_integer<std::uint32_t>(b[1]) << 16) |
         (std::to_integer<std::uint32_t>(b[2]) << 8) | std::to_integer<std::uint32_t>(b[3]);
}

std::uint16_t get_u16(std::span<const std::byte> b) {
  return static_cast<std::uint16_t>((std::to_integer<unsigned>(b[0]) << 8) | std::to_integer<unsigned>(b[1]));
}

}  // namespace

Bytes encode_frame(std::string_view topic, std::span<const std::byte> payload) {
  if (topic.empty() || topic.size() > kMaxTopicBytes) throw FrameError("topic must be 1..255 bytes");
  const std::uint64_t body = 2 + topic.size() + payload.size();
  if (body > std::numeric_limits<std::uint32_t>::max()) throw FrameError("payload too large for frame");

  Bytes out;
  out.reserve(kFrameHeaderBytes + body);
  put_u32(out, static_cast<std::uint32_t>(body));
  put_u16(out, static_cast<std::uint16_t>(topic.size()));
  const auto* t = reinterpret_cast<const std::byte*>(topic.data());
  out.insert(out.end(), t, t + topic.size());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::optional<std::size_t> peek_frame_size(std::span<const std::byte> bytes) {
  if (bytes.size() < kFrameHeaderBytes) return std::nullopt;
  return kFrameHeaderBytes + static_cast<std::size_t>(get_u32(bytes));
}

Frame decode_frame(std::span<const std::byte> bytes) {
  if (bytes.size() < kFrameHeaderBytes + 2) throw FrameError("truncated frame header");
  const std::size_t body = get_u32(bytes);
  if (body < 2) throw FrameError("frame_length smaller than topic_length field");
  if (bytes.size() - kFrameHeaderBytes < body) throw FrameError("frame_length exceeds available bytes");
  if (bytes.size() - kFrameHeaderBytes > body) throw FrameError("trailing bytes after frame");
  const std::size_t topic_len = get_u16(bytes.subspan(kFrameHeaderBytes));
  if (topic_len == 0 || topic_len > kMaxTopicBytes) throw FrameError("topic_length out of range");
  if (topic_len > body - 2) throw FrameError("topic_length exceeds frame");

  const auto topic = bytes.subspan(kFrameHeaderBytes + 2, topic_len);
  const auto payload = bytes.subspan(kFrameHeaderBytes + 2 + topic_len);
  Frame f;
  f.topic.assign(reinterpret_cast<const char*>(topic.data()), topic.size());
  f.payload.assign(payload.begin(), payload.end());
  return f;
}

}  // namespace piedge::bus
