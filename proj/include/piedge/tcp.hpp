#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "piedge/bus.hpp"
#include "piedge/wire.hpp"

namespace piedge::bus {

inline constexpr const char* kAddressEnv = "PIEDGE_BUS_ADDR";

struct Address {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7400;

  /// "host:port" (IPv4 dotted quad or "localhost"). Throws BusError.
  static Address parse(std::string_view text);
  std::string to_string() const;
};

/// Address from PIEDGE_BUS_ADDR, or `fallback` when unset.
Address address_from_env(const Address& fallback = {});

/// Listens for peers. Every frame a peer sends is passed to the handler on
/// that peer's reader thread.
class TcpServer {
 public:
  using PeerId = std::uint64_t;
  using FrameHandler = std::function<void(PeerId, Frame)>;

  /// Port 0 picks an ephemeral port.
  TcpServer(const Address& listen, FrameHandler on_frame);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const;
  std::size_t peer_count() const;

  /// Encodes once and writes the same bytes to every peer except `skip`.
  /// Returns the number of peers written.
  std::size_t broadcast(std::string_view topic, std::span<const std::byte> payload,
                        std::optional<PeerId> skip = std::nullopt);
  bool send_to(PeerId peer, std::string_view topic, std::span<const std::byte> payload);

  /// Closes the listener and every peer; waits for reader threads.
  void stop();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

/// One connection to a TcpServer.
class TcpClient {
 public:
  /// Connects and exchanges the connection magic. Throws BusError.
  explicit TcpClient(const Address& server);
  ~TcpClient();
  TcpClient(const TcpClient&) = delete;
  TcpClient& operator=(const TcpClient&) = delete;

  void send(std::string_view topic, std::span<const std::byte> payload);
  /// Empty on timeout; ClosedError when the server hung up.
  std::optional<Frame> receive(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  Bytes buffer_;
};

/// TCP endpoint for a Bus: frames received from a peer are published on the
/// local bus and relayed to every other peer.
class TcpBusBridge {
 public:
  TcpBusBridge(Bus& bus, const Address& listen);
  std::uint16_t port() const { return server_.port(); }
  std::size_t peer_count() const { return server_.peer_count(); }
  void stop() { server_.stop(); }

 private:
  Bus& bus_;
  TcpServer server_;
};

}  // namespace piedge::bus
