#include "piedge/bus.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <future>
#include <map>
#include <mutex>
#include <thread>

namespace piedge::bus {

namespace {
std::atomic<std::uint64_t> g_payload_allocations{0};
}  // namespace

Topic::Topic(std::string name) : name_(std::move(name)) {
  if (name_.empty()) throw BusError("topic must not be empty");
  if (name_.size() > kMaxTopicBytes) throw BusError("topic longer than 255 bytes");
}

Payload::Payload() : Payload(std::make_shared<const Bytes>()) {}

Payload Payload::copy_of(std::span<const std::byte> bytes) { return adopt(Bytes(bytes.begin(), bytes.end())); }

Payload Payload::copy_of(std::string_view text) { return adopt(to_bytes(text)); }

Payload Payload::adopt(Bytes bytes) {
  g_payload_allocations.fetch_add(1, std::memory_order_relaxed);
  return Payload(std::make_shared<const Bytes>(std::move(bytes)));
}

std::string_view Payload::text() const noexcept {
  return {reinterpret_cast<const char*>(buffer_->data()), buffer_->size()};
}

std::uint64_t Payload::allocations() noexcept { return g_payload_allocations.load(std::memory_order_relaxed); }

Bytes to_bytes(std::string_view text) {
  Bytes out(text.size());
  std::transform(text.begin(), text.end(), out.begin(), [](char c) { return static_cast<std::byte>(c); });
  return out;
}

namespace detail {

struct SubscriberQueue {
  SubscriberQueue(Topic t, std::size_t cap) : topic(std::move(t)), capacity(cap) {}

  const Topic topic;
  const std::size_t capacity;

  mutable std::mutex mutex;
  std::condition_variable ready;
  std::deque<Envelope> queue;
  std::uint64_t dropped = 0;
  bool closed = false;

  void push(Envelope env) {
    {
      std::lock_guard lock(mutex);
      if (queue.size() == capacity) {
        queue.pop_front();
        ++dropped;
      }
      queue.push_back(std::move(env));
    }
    ready.notify_one();
  }

  void close() {
    {
      std::lock_guard lock(mutex);
      closed = true;
    }
    ready.notify_all();
  }
};

struct BusState {
  explicit BusState(BusConfig c) : config(c) {}

  const BusConfig config;

  // Held across sequence assignment and fanout so every subscriber sees one
  // global publish order.
  std::mutex publish_mutex;

  mutable std::mutex mutex;
  std::map<Topic, std::vector<std::shared_ptr<SubscriberQueue>>> topics;
  std::map<Topic, std::shared_ptr<const ServiceHandler>> services;
  std::map<Topic, std::shared_ptr<const ActionHandler>> actions;
  std::uint64_t next_publisher = 0;
  bool shut_down = false;

  void check_open() const {
    if (shut_down) throw ClosedError();
  }
};

}  // namespace detail

Subscription::Subscription(std::weak_ptr<detail::BusState> bus, std::shared_ptr<detail::SubscriberQueue> queue)
    : bus_(std::move(bus)), queue_(std::move(queue)) {}

Subscription::Subscription(Subscription&&) noexcept = default;

Subscription& Subscription::operator=(Subscription&& other) noexcept {
  if (this != &other) {
    Subscription dying(std::move(*this));
    bus_ = std::move(other.bus_);
    queue_ = std::move(other.queue_);
  }
  return *this;
}

Subscription::~Subscription() {
  if (!queue_) return;
  if (auto state = bus_.lock()) {
    std::lock_guard lock(state->mutex);
    auto it = state->topics.find(queue_->topic);
    if (it != state->topics.end()) {
      std::erase(it->second, queue_);
      if (it->second.empty()) state->topics.erase(it);
    }
  }
}

std::optional<Envelope> Subscription::next_message(std::chrono::nanoseconds timeout) {
  std::unique_lock lock(queue_->mutex);
  if (!queue_->ready.wait_for(lock, timeout, [&] { return !queue_->queue.empty() || queue_->closed; }))
    return std::nullopt;
  if (queue_->queue.empty()) throw ClosedError();
  Envelope env = std::move(queue_->queue.front());
  queue_->queue.pop_front();
  return env;
}

const Topic& Subscription::topic() const noexcept { return queue_->topic; }
std::size_t Subscription::capacity() const noexcept { return queue_->capacity; }

std::size_t Subscription::queued() const {
  std::lock_guard lock(queue_->mutex);
  return queue_->queue.size();
}

std::uint64_t Subscription::drop_count() const {
  std::lock_guard lock(queue_->mutex);
  return queue_->dropped;
}

Bus::Bus(BusConfig config) : state_(std::make_shared<detail::BusState>(config)) {
  default_publisher_.reset(new Publisher(state_, Topic("_bus"), state_->next_publisher++));
}

Bus::~Bus() { shutdown(); }

Subscription Bus::subscribe(const Topic& topic, std::size_t capacity) {
  if (capacity == 0) throw BusError("subscription capacity must be >= 1");
  auto queue = std::make_shared<detail::SubscriberQueue>(topic, capacity);
  // Taking the publish lock means no in-flight publish can reach this queue.
  std::lock_guard publishing(state_->publish_mutex);
  std::lock_guard lock(state_->mutex);
  state_->check_open();
  state_->topics[topic].push_back(queue);
  return Subscription(state_, std::move(queue));
}

Publisher Bus::advertise(const Topic& topic) {
  std::lock_guard lock(state_->mutex);
  state_->check_open();
  return Publisher(state_, topic, state_->next_publisher++);
}

std::size_t Bus::publish(const Topic& topic, std::span<const std::byte> bytes, FanoutMode mode) {
  return default_publisher_->deliver(topic, bytes, nullptr, mode);
}

std::size_t Bus::publish(const Topic& topic, const Payload& payload) {
  return default_publisher_->deliver(topic, payload.bytes(), &payload, FanoutMode::kZeroCopy);
}

std::size_t Bus::subscriber_count(const Topic& topic) const {
  std::lock_guard lock(state_->mutex);
  auto it = state_->topics.find(topic);
  return it == state_->topics.end() ? 0 : it->second.size();
}

std::size_t Publisher::publish(std::span<const std::byte> bytes, FanoutMode mode) {
  return deliver(topic_, bytes, nullptr, mode);
}

std::size_t Publisher::publish(const Payload& payload) {
  return deliver(topic_, payload.bytes(), &payload, FanoutMode::kZeroCopy);
}

std::size_t Publisher::deliver(const Topic& topic, std::span<const std::byte> bytes, const Payload* shared,
                               FanoutMode mode) {
  if (bytes.size() > state_->config.max_payload)
    throw BusError("payload of " + std::to_string(bytes.size()) + " bytes exceeds limit of " +
                   std::to_string(state_->config.max_payload));

  std::lock_guard publishing(state_->publish_mutex);
  std::vector<std::shared_ptr<detail::SubscriberQueue>> targets;
  {
    std::lock_guard lock(state_->mutex);
    state_->check_open();
    if (auto it = state_->topics.find(topic); it != state_->topics.end()) targets = it->second;
  }
  const std::uint64_t sequence = ++sequence_;
  if (targets.empty()) return 0;

  const auto now = Clock::now();
  if (mode == FanoutMode::kZeroCopy) {
    const Payload payload = shared ? *shared : Payload::copy_of(bytes);
    for (auto& q : targets) q->push(Envelope{topic, id_, sequence, payload, now});
  } else {
    for (auto& q : targets) q->push(Envelope{topic, id_, sequence, Payload::copy_of(bytes), now});
  }
  return targets.size();
}

void Bus::register_service(const Topic& topic, ServiceHandler handler) {
  std::lock_guard lock(state_->mutex);
  state_->check_open();
  state_->services[topic] = std::make_shared<const ServiceHandler>(std::move(handler));
}

void Bus::unregister_service(const Topic& topic) {
  std::lock_guard lock(state_->mutex);
  state_->services.erase(topic);
}

Bytes Bus::call_service(const Topic& topic, std::span<const std::byte> request, std::chrono::nanoseconds timeout) {
  std::shared_ptr<const ServiceHandler> handler;
  {
    std::lock_guard lock(state_->mutex);
    state_->check_open();
    auto it = state_->services.find(topic);
    if (it == state_->services.end()) throw NotFoundError("no service on topic '" + topic.str() + "'");
    handler = it->second;
  }

  // The handler runs on its own thread so a slow handler cannot hold the
  // caller past its timeout; a late response is discarded.
  std::packaged_task<Bytes()> task([handler, req = Bytes(request.begin(), request.end())] { return (*handler)(req); });
  auto response = task.get_future();
  std::thread(std::move(task)).detach();
  if (response.wait_for(timeout) != std::future_status::ready)
    throw TimeoutError("service '" + topic.str() + "' did not answer in time");
  try {
    return response.get();
  } catch (const BusError&) {
    throw;
  } catch (const std::exception& e) {
    throw BusError("service '" + topic.str() + "' failed: " + e.what());
  }
}

void Bus::register_action(const Topic& topic, ActionHandler handler) {
  std::lock_guard lock(state_->mutex);
  state_->check_open();
  state_->actions[topic] = std::make_shared<const ActionHandler>(std::move(handler));
}

void Bus::unregister_action(const Topic& topic) {
  std::lock_guard lock(state_->mutex);
  state_->actions.erase(topic);
}

namespace {

// Server-to-client stream of one action: feedback items then one terminal item.
struct ActionChannel {
  struct Item {
    Bytes bytes;
    bool terminal = false;
    bool ok = false;
    std::string error;
  };

  std::mutex mutex;
  std::condition_variable ready;
  std::deque<Item> items;

  void push(Item item) {
    {
      std::lock_guard lock(mutex);
      items.push_back(std::move(item));
    }
    ready.notify_one();
  }

  Item pop() {
    std::unique_lock lock(mutex);
    ready.wait(lock, [&] { return !items.empty(); });
    Item item = std::move(items.front());
    items.pop_front();
    return item;
  }
};

}  // namespace

ActionResult Bus::action_execute(const Topic& topic, std::span<const std::byte> goal, const FeedbackFn& feedback) {
  std::shared_ptr<const ActionHandler> handler;
  {
    std::lock_guard lock(state_->mutex);
    state_->check_open();
    auto it = state_->actions.find(topic);
    if (it == state_->actions.end()) throw NotFoundError("no action server on topic '" + topic.str() + "'");
    handler = it->second;
  }

  auto channel = std::make_shared<ActionChannel>();
  std::thread server([handler, channel, g = Bytes(goal.begin(), goal.end())] {
    const FeedbackFn emit = [&](std::span<const std::byte> fb) {
      channel->push({Bytes(fb.begin(), fb.end()), false, false, {}});
    };
    try {
      Bytes result = (*handler)(g, emit);
      channel->push({std::move(result), true, true, {}});
    } catch (const std::exception& e) {
      channel->push({{}, true, false, e.what()});
    } catch (...) {
      channel->push({{}, true, false, "action aborted"});
    }
  });

  ActionResult out;
  for (;;) {
    auto item = channel->pop();
    if (item.terminal) {
      out.ok = item.ok;
      out.result = std::move(item.bytes);
      out.error = std::move(item.error);
      break;
    }
    if (feedback) feedback(item.bytes);
  }
  server.join();
  return out;
}

void Bus::shutdown() {
  std::vector<std::shared_ptr<detail::SubscriberQueue>> queues;
  {
    std::lock_guard lock(state_->mutex);
    if (state_->shut_down) return;
    state_->shut_down = true;
    for (auto& [topic, subs] : state_->topics) queues.insert(queues.end(), subs.begin(), subs.end());
    state_->services.clear();
    state_->actions.clear();
  }
  for (auto& q : queues) q->close();
}

bool Bus::is_shut_down() const {
  std::lock_guard lock(state_->mutex);
  return state_->shut_down;
}

}  // namespace piedge::bus
