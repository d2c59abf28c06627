#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "piedge/bus.hpp"

namespace piedge::bus {

// Frame layout, all integers big-endian:
//   u32 frame_length   bytes after this field = 2 + topic_length + payload
//   u16 topic_length   <= 255
//   topic bytes
//   payload bytes
// Each direction of a TCP connection starts with the two magic bytes.

inline constexpr std::array<std::byte, 2> kConnectionMagic{std::byte{0xED}, std::byte{0x6E}};
inline constexpr std::size_t kFrameHeaderBytes = 4;

class FrameError : public BusError {
 public:
  using BusError::BusError;
};

struct Frame {
  std::string topic;
  Bytes payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Throws FrameError for an empty or over-long topic, or a payload that does
/// not fit the 32-bit length field.
Bytes encode_frame(std::string_view topic, std::span<const std::byte> payload);

/// Decodes exactly one frame occupying all of `bytes`. Throws FrameError on
/// truncation, trailing bytes, or inconsistent lengths.
Frame decode_frame(std::span<const std::byte> bytes);

/// Total size of the frame at the start of `bytes` (header included), or
/// empty if fewer than 4 bytes are available.
std::optional<std::size_t> peek_frame_size(std::span<const std::byte> bytes);

}  // namespace piedge::bus
