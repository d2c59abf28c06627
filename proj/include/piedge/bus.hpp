#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace piedge::bus {

using Bytes = std::vector<std::byte>;
using Clock = std::chrono::steady_clock;

class BusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The bus was shut down.
class ClosedError : public BusError {
 public:
  ClosedError() : BusError("bus is shut down") {}
};

class NotFoundError : public BusError {
 public:
  using BusError::BusError;
};

class TimeoutError : public BusError {
 public:
  using BusError::BusError;
};

inline constexpr std::size_t kMaxTopicBytes = 255;
inline constexpr std::size_t kDefaultMaxPayload = std::size_t{64} << 20;

/// Exact-match topic name, 1..255 bytes.
class Topic {
 public:
  /// Throws BusError when empty or longer than kMaxTopicBytes.
  explicit Topic(std::string name);

  const std::string& str() const noexcept { return name_; }
  friend auto operator<=>(const Topic&, const Topic&) = default;

 private:
  std::string name_;
};

/// Immutable, reference-counted payload buffer. Copying a Payload copies the
/// handle, never the bytes.
class Payload {
 public:
  Payload();

  /// Allocates one buffer and copies `bytes` into it.
  static Payload copy_of(std::span<const std::byte> bytes);
  static Payload copy_of(std::string_view text);
  /// Takes ownership of `bytes` as a new buffer.
  static Payload adopt(Bytes bytes);

  std::span<const std::byte> bytes() const noexcept { return *buffer_; }
  std::size_t size() const noexcept { return buffer_->size(); }
  std::string_view text() const noexcept;

  /// Same underlying buffer.
  bool shares_buffer_with(const Payload& other) const noexcept { return buffer_ == other.buffer_; }
  long use_count() const noexcept { return buffer_.use_count(); }

  /// Process-wide count of payload buffers created so far.
  static std::uint64_t allocations() noexcept;

 private:
  explicit Payload(std::shared_ptr<const Bytes> buffer) : buffer_(std::move(buffer)) {}
  std::shared_ptr<const Bytes> buffer_;
};

Bytes to_bytes(std::string_view text);

struct Envelope {
  Topic topic;
  std::uint64_t publisher = 0;  ///< publisher id, unique within a bus
  std::uint64_t sequence = 0;   ///< per publisher, starts at 1
  Payload payload;
  Clock::time_point published_at;
};

enum class FanoutMode {
  kZeroCopy,           ///< one buffer shared by every subscriber
  kPerSubscriberCopy,  ///< one fresh buffer per subscriber (unicast-loop baseline)
};

struct BusConfig {
  std::size_t max_payload = kDefaultMaxPayload;
};

class Bus;
class Publisher;
namespace detail {
struct BusState;
struct SubscriberQueue;
}  // namespace detail

/// Bounded delivery queue for one topic. When full, the oldest envelope is
/// dropped. Owned by one consumer at a time; movable between threads.
class Subscription {
 public:
  Subscription(Subscription&&) noexcept;
  Subscription& operator=(Subscription&&) noexcept;
  ~Subscription();

  /// Oldest queued envelope, waiting up to `timeout`. Empty on timeout;
  /// throws ClosedError once the bus is shut down and the queue is drained.
  std::optional<Envelope> next_message(std::chrono::nanoseconds timeout);

  const Topic& topic() const noexcept;
  std::size_t capacity() const noexcept;
  std::size_t queued() const;
  std::uint64_t drop_count() const;

 private:
  friend class Bus;
  Subscription(std::weak_ptr<detail::BusState> bus, std::shared_ptr<detail::SubscriberQueue> queue);

  std::weak_ptr<detail::BusState> bus_;
  std::shared_ptr<detail::SubscriberQueue> queue_;
};

/// Feedback channel handed to action handlers.
using FeedbackFn = std::function<void(std::span<const std::byte>)>;
using ServiceHandler = std::function<Bytes(std::span<const std::byte> request)>;
/// Emits zero or more feedback messages, then returns the result. Throwing
/// aborts the action; the exception message becomes the error result.
using ActionHandler = std::function<Bytes(std::span<const std::byte> goal, const FeedbackFn& feedback)>;

struct ActionResult {
  bool ok = false;
  Bytes result;
  std::string error;
};

/// In-process publish/subscribe bus with request/response services and
/// feedback-streaming actions. All members are thread-safe.
class Bus {
 public:
  explicit Bus(BusConfig config = {});
  ~Bus();
  Bus(const Bus&) = delete;
  Bus& operator=(const Bus&) = delete;

  /// Only messages published after this call are delivered. capacity >= 1.
  Subscription subscribe(const Topic& topic, std::size_t capacity = 64);

  /// Publisher with its own sequence counter.
  Publisher advertise(const Topic& topic);

  // Publish through the bus's built-in publisher. Returns the number of
  // subscriptions the message was queued on.
  std::size_t publish(const Topic& topic, std::span<const std::byte> bytes,
                      FanoutMode mode = FanoutMode::kZeroCopy);
  std::size_t publish(const Topic& topic, const Payload& payload);

  std::size_t subscriber_count(const Topic& topic) const;

  /// Replaces any existing handler on the topic.
  void register_service(const Topic& topic, ServiceHandler handler);
  void unregister_service(const Topic& topic);
  /// Runs the handler and returns its response. Throws NotFoundError,
  /// TimeoutError, ClosedError, or BusError carrying a handler exception.
  Bytes call_service(const Topic& topic, std::span<const std::byte> request, std::chrono::nanoseconds timeout);

  void register_action(const Topic& topic, ActionHandler handler);
  void unregister_action(const Topic& topic);
  /// Feedback is delivered to `feedback` on the calling thread, in emission
  /// order, before the result. Throws NotFoundError / ClosedError.
  ActionResult action_execute(const Topic& topic, std::span<const std::byte> goal, const FeedbackFn& feedback);

  /// Rejects further work and wakes every blocked next_message.
  void shutdown();
  bool is_shut_down() const;

 private:
  friend class Publisher;
  std::shared_ptr<detail::BusState> state_;
  std::unique_ptr<Publisher> default_publisher_;
};

class Publisher {
 public:
  const Topic& topic() const noexcept { return topic_; }
  std::uint64_t id() const noexcept { return id_; }

  std::size_t publish(std::span<const std::byte> bytes, FanoutMode mode = FanoutMode::kZeroCopy);
  std::size_t publish(const Payload& payload);

 private:
  friend class Bus;
  Publisher(std::shared_ptr<detail::BusState> state, Topic topic, std::uint64_t id)
      : state_(std::move(state)), topic_(std::move(topic)), id_(id) {}

  std::size_t deliver(const Topic& topic, std::span<const std::byte> bytes, const Payload* shared, FanoutMode mode);

  std::shared_ptr<detail::BusState> state_;
  Topic topic_;
  std::uint64_t id_;
  std::uint64_t sequence_ = 0;
};

}  // namespace piedge::bus
