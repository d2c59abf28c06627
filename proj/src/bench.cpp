#include "piedge/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>
#include <vector>

#include "piedge/tcp.hpp"

namespace piedge::bus {

using namespace std::chrono_literals;

std::string to_string(FanoutMode mode) {
  return mode == FanoutMode::kZeroCopy ? "zero-copy" : "per-subscriber-copy";
}

std::string to_string(Transport transport) {
  return transport == Transport::kInProcess ? "inproc" : "tcp";
}

ThroughputReport bench_throughput(std::size_t subscribers, std::size_t msg_size, FanoutMode mode,
                                  std::chrono::milliseconds duration) {
  if (subscribers == 0) throw BusError("benchmark needs at least one subscriber");

  Bus bus;
  const Topic topic("bench/throughput");
  std::vector<Subscription> subs;
  for (std::size_t i = 0; i < subscribers; ++i) subs.push_back(bus.subscribe(topic, 16));

  std::atomic<bool> done{false};
  std::vector<std::thread> consumers;
  for (auto& sub : subs) {
    consumers.emplace_back([&done, &sub] {
      try {
        while (!done.load(std::memory_order_relaxed)) (void)sub.next_message(5ms);
      } catch (const ClosedError&) {
      }
    });
  }

  const Bytes source(msg_size, std::byte{0x5A});
  const std::uint64_t alloc_before = Payload::allocations();
  std::uint64_t sent = 0;
  const auto start = Clock::now();
  const auto stop_at = start + duration;
  auto now = start;
  do {
    for (int i = 0; i < 8; ++i, ++sent) bus.publish(topic, source, mode);
    now = Clock::now();
  } while (now < stop_at);
  const std::uint64_t allocations = Payload::allocations() - alloc_before;

  done = true;
  bus.shutdown();
  for (auto& t : consumers) t.join();

  ThroughputReport r;
  r.subscribers = subscribers;
  r.msg_size = msg_size;
  r.mode = mode;
  r.messages = sent;
  r.seconds = std::chrono::duration<double>(now - start).count();
  r.msgs_per_s = static_cast<double>(sent) / r.seconds;
  r.bytes_per_s = r.msgs_per_s * static_cast<double>(msg_size);
  r.allocations = allocations;
  return r;
}

namespace {

LatencyReport summarize(std::vector<double> one_way_us, std::size_t msg_size, Transport transport) {
  LatencyReport r;
  r.msg_size = msg_size;
  r.transport = transport;
  r.samples = one_way_us.size();
  r.mean_us = std::accumulate(one_way_us.begin(), one_way_us.end(), 0.0) / static_cast<double>(r.samples);
  std::sort(one_way_us.begin(), one_way_us.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(r.samples))) - 1;
  r.p99_us = one_way_us[std::min(idx, r.samples - 1)];
  return r;
}

double half_round_trip_us(Clock::time_point start, Clock::time_point end) {
  return std::chrono::duration<double, std::micro>(end - start).count() / 2.0;
}

constexpr std::size_t kWarmup = 10;

std::vector<double> inprocess_round_trips(std::size_t msg_size, std::size_t samples) {
  Bus bus;
  const Topic ping("bench/ping"), pong("bench/pong");
  auto ping_sub = bus.subscribe(ping, 4);
  auto pong_sub = bus.subscribe(pong, 4);

  std::thread echo([&] {
    try {
      for (;;)
        if (auto env = ping_sub.next_message(1s)) bus.publish(pong, env->payload);
    } catch (const ClosedError&) {
    }
  });

  const Payload payload = Payload::adopt(Bytes(msg_size, std::byte{0x42}));
  std::vector<double> out;
  out.reserve(samples);
  for (std::size_t i = 0; i < samples + kWarmup; ++i) {
    const auto start = Clock::now();
    bus.publish(ping, payload);
    auto reply = pong_sub.next_message(10s);
    const auto end = Clock::now();
    if (!reply) throw TimeoutError("in-process echo did not answer");
    if (i >= kWarmup) out.push_back(half_round_trip_us(start, end));
  }
  bus.shutdown();
  echo.join();
  return out;
}

std::vector<double> tcp_round_trips(std::size_t msg_size, std::size_t samples) {
  TcpServer* server_ptr = nullptr;
  TcpServer server(Address{"127.0.0.1", 0}, [&server_ptr](TcpServer::PeerId peer, Frame frame) {
    server_ptr->send_to(peer, frame.topic, frame.payload);
  });
  server_ptr = &server;

  TcpClient client(Address{"127.0.0.1", server.port()});
  const Bytes payload(msg_size, std::byte{0x42});
  std::vector<double> out;
  out.reserve(samples);
  for (std::size_t i = 0; i < samples + kWarmup; ++i) {
    const auto start = Clock::now();
    client.send("bench/echo", payload);
    auto reply = client.receive(10s);
    const auto end = Clock::now();
    if (!reply) throw TimeoutError("tcp echo did not answer");
    if (i >= kWarmup) out.push_back(half_round_trip_us(start, end));
  }
  server.stop();
  return out;
}

}  // namespace

LatencyReport bench_latency(std::size_t msg_size, Transport transport, std::size_t samples) {
  if (samples < 100) throw BusError("latency benchmark needs at least 100 samples");
  auto one_way = transport == Transport::kInProcess ? inprocess_round_trips(msg_size, samples)
                                                    : tcp_round_trips(msg_size, samples);
  return summarize(std::move(one_way), msg_size, transport);
}

}  // namespace piedge::bus
