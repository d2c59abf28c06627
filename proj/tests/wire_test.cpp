#include "piedge/wire.hpp"

#include <gtest/gtest.h>

#include <random>

namespace piedge::bus {
namespace {

TEST(Wire, LayoutIsBigEndian) {
  const Bytes payload = to_bytes("abcdef");
  const Bytes frame = encode_frame("imu", payload);
  ASSERT_EQ(frame.size(), 15u);
  const Bytes header{std::byte{0}, std::byte{0}, std::byte{0}, std::byte{11}, std::byte{0}, std::byte{3}};
  EXPECT_TRUE(std::equal(header.begin(), header.end(), frame.begin()));
  EXPECT_EQ(std::string(reinterpret_cast<const char*>(frame.data()) + 6, 3), "imu");
}

TEST(Wire, EmptyPayload) {
  const Bytes frame = encode_frame("cam", {});
  ASSERT_EQ(frame.size(), 4u + 2u + 3u);
  EXPECT_EQ(*peek_frame_size(frame), frame.size());
  EXPECT_EQ(std::to_integer<int>(frame[3]), 5);
  const auto f = decode_frame(frame);
  EXPECT_EQ(f.topic, "cam");
  EXPECT_TRUE(f.payload.empty());
}

TEST(Wire, DecodeErrors) {
  Bytes frame = encode_frame("imu", to_bytes("abcdef"));
  EXPECT_THROW(decode_frame(std::span(frame).first(frame.size() - 1)), FrameError);
  EXPECT_THROW(decode_frame(std::span(frame).first(3)), FrameError);
  Bytes longer = frame;
  longer.push_back(std::byte{0});
  EXPECT_THROW(decode_frame(longer), FrameError);

  Bytes bad_topic = frame;
  bad_topic[5] = std::byte{12};  // topic_length beyond frame body
  EXPECT_THROW(decode_frame(bad_topic), FrameError);
  bad_topic[5] = std::byte{0};
  EXPECT_THROW(decode_frame(bad_topic), FrameError);

  EXPECT_THROW(encode_frame("", {}), FrameError);
  EXPECT_THROW(encode_frame(std::string(256, 't'), {}), FrameError);
  EXPECT_FALSE(peek_frame_size(std::span(frame).first(2)));
}

TEST(Wire, RoundTripRandomFrames) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 2000; ++i) {
    std::string topic(1 + rng() % 255, ' ');
    for (auto& c : topic) c = static_cast<char>(rng() & 0xFF);
    Bytes payload(rng() % 3000);
    for (auto& b : payload) b = static_cast<std::byte>(rng() & 0xFF);
    const Frame expected{topic, payload};
    const Bytes frame = encode_frame(topic, payload);
    EXPECT_EQ(frame.size(), 6 + topic.size() + payload.size());
    EXPECT_EQ(decode_frame(frame), expected);
  }
}

}  // namespace
}  // namespace piedge::bus
