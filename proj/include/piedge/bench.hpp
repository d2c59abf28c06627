#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>

#include "piedge/bus.hpp"

namespace piedge::bus {

struct ThroughputReport {
  std::size_t subscribers = 0;
  std::size_t msg_size = 0;
  FanoutMode mode = FanoutMode::kZeroCopy;
  std::uint64_t messages = 0;
  double seconds = 0.0;
  double msgs_per_s = 0.0;
  double bytes_per_s = 0.0;         ///< published payload bytes per second
  std::uint64_t allocations = 0;    ///< payload buffers created during the run
};

/// Publishes `msg_size`-byte messages for `duration` while `subscribers`
/// consumer threads drain their queues. Every publish builds its payload from
/// a source buffer, so zero-copy pays one copy per message and the
/// per-subscriber mode pays one per subscriber.
ThroughputReport bench_throughput(std::size_t subscribers, std::size_t msg_size, FanoutMode mode,
                                  std::chrono::milliseconds duration);

enum class Transport { kInProcess, kTcpLoopback };

struct LatencyReport {
  std::size_t msg_size = 0;
  Transport transport = Transport::kInProcess;
  std::size_t samples = 0;
  double mean_us = 0.0;  ///< one-way, half the round trip
  double p99_us = 0.0;
};

/// Ping-pong of one message between two endpoints; samples >= 100. The
/// in-process variant reuses one payload buffer for every hop, the TCP
/// variant goes through an echo server on 127.0.0.1.
LatencyReport bench_latency(std::size_t msg_size, Transport transport, std::size_t samples);

std::string to_string(FanoutMode mode);
std::string to_string(Transport transport);

}  // namespace piedge::bus
