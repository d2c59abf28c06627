#include "piedge/tcp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <charconv>
#include <condition_variable>
#include <cstdlib>
#include <cstring>
#include <map>
#include <mutex>
#include <thread>

namespace piedge::bus {

namespace {

[[noreturn]] void fail(const std::string& what) { throw BusError(what + ": " + std::strerror(errno)); }

void write_all(int fd, std::span<const std::byte> bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("send");
    }
    bytes = bytes.subspan(static_cast<std::size_t>(n));
  }
}

// False on orderly EOF before the first byte or on a reset.
bool read_exact(int fd, std::span<std::byte> out) {
  while (!out.empty()) {
    const ssize_t n = ::recv(fd, out.data(), out.size(), 0);
    if (n == 0) return false;
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    out = out.subspan(static_cast<std::size_t>(n));
  }
  return true;
}

// Reads one frame into `buffer` and decodes it; empty on EOF.
std::optional<Frame> read_frame(int fd, Bytes& buffer) {
  buffer.resize(kFrameHeaderBytes);
  if (!read_exact(fd, buffer)) return std::nullopt;
  const std::size_t total = *peek_frame_size(buffer);
  buffer.resize(total);
  if (!read_exact(fd, std::span(buffer).subspan(kFrameHeaderBytes))) return std::nullopt;
  return decode_frame(buffer);
}

bool read_magic(int fd) {
  std::array<std::byte, 2> magic{};
  return read_exact(fd, magic) && magic == kConnectionMagic;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

sockaddr_in to_sockaddr(const Address& a) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(a.port);
  const std::string host = a.host == "localhost" ? "127.0.0.1" : a.host;
  if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) throw BusError("bad IPv4 address '" + a.host + "'");
  return sa;
}

}  // namespace

Address Address::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) throw BusError("address must be host:port");
  Address a;
  a.host = std::string(text.substr(0, colon));
  const auto port = text.substr(colon + 1);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || ptr != port.data() + port.size() || value > 65535)
    throw BusError("bad port in address '" + std::string(text) + "'");
  a.port = static_cast<std::uint16_t>(value);
  to_sockaddr(a);
  return a;
}

std::string Address::to_string() const { return host + ":" + std::to_string(port); }

Address address_from_env(const Address& fallback) {
  const char* env = std::getenv(kAddressEnv);
  return env && *env ? Address::parse(env) : fallback;
}

struct TcpServer::Impl : std::enable_shared_from_this<TcpServer::Impl> {
  // The descriptor lives as long as the Peer, so shutdown() from any thread
  // holding a reference is safe.
  struct Peer {
    explicit Peer(int f) : fd(f) {}
    ~Peer() { ::close(fd); }
    Peer(const Peer&) = delete;
    Peer& operator=(const Peer&) = delete;

    const int fd;
    std::mutex write_mutex;
    std::atomic<bool> ready{false};  // magic exchanged
  };

  FrameHandler on_frame;
  int listen_fd = -1;
  std::uint16_t port = 0;

  mutable std::mutex mutex;
  std::condition_variable idle;
  std::map<PeerId, std::shared_ptr<Peer>> peers;
  PeerId next_peer = 1;
  std::size_t running_threads = 0;
  bool stopping = false;

  void accept_loop() {
    for (;;) {
      const int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR || errno == ECONNABORTED) continue;
        break;
      }
      set_nodelay(fd);
      auto peer = std::make_shared<Peer>(fd);
      PeerId id;
      {
        std::lock_guard lock(mutex);
        if (stopping) break;
        id = next_peer++;
        ++running_threads;
        peers.emplace(id, peer);
      }
      std::thread([self = shared_from_this(), id, peer] { self->reader(id, peer); }).detach();
    }
    finished();
  }

  void reader(PeerId id, std::shared_ptr<Peer> peer) {
    bool ok = true;
    try {
      std::lock_guard w(peer->write_mutex);
      write_all(peer->fd, kConnectionMagic);
    } catch (const BusError&) {
      ok = false;
    }
    if (ok && read_magic(peer->fd)) {
      peer->ready = true;
      Bytes buffer;
      try {
        while (auto frame = read_frame(peer->fd, buffer)) on_frame(id, std::move(*frame));
      } catch (const BusError&) {
        // Malformed frame or failed handler write: drop the peer.
      }
    }
    {
      std::lock_guard lock(mutex);
      peers.erase(id);
    }
    ::shutdown(peer->fd, SHUT_RDWR);
    finished();
  }

  void finished() {
    std::lock_guard lock(mutex);
    --running_threads;
    idle.notify_all();
  }

  bool write_frame(Peer& peer, std::span<const std::byte> frame) {
    std::lock_guard w(peer.write_mutex);
    try {
      write_all(peer.fd, frame);
      return true;
    } catch (const BusError&) {
      return false;
    }
  }
};

TcpServer::TcpServer(const Address& listen, FrameHandler on_frame) : impl_(std::make_shared<Impl>()) {
  impl_->on_frame = std::move(on_frame);
  const sockaddr_in sa = to_sockaddr(listen);
  impl_->listen_fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (impl_->listen_fd < 0) fail("socket");
  int one = 1;
  ::setsockopt(impl_->listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(impl_->listen_fd, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) < 0) {
    ::close(impl_->listen_fd);
    fail("bind " + listen.to_string());
  }
  if (::listen(impl_->listen_fd, 64) < 0) {
    ::close(impl_->listen_fd);
    fail("listen");
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(impl_->listen_fd, reinterpret_cast<sockaddr*>(&bound), &len);
  impl_->port = ntohs(bound.sin_port);
  impl_->running_threads = 1;
  std::thread([self = impl_] { self->accept_loop(); }).detach();
}

TcpServer::~TcpServer() { stop(); }

std::uint16_t TcpServer::port() const { return impl_->port; }

std::size_t TcpServer::peer_count() const {
  std::lock_guard lock(impl_->mutex);
  std::size_t n = 0;
  for (const auto& [id, peer] : impl_->peers) n += peer->ready ? 1 : 0;
  return n;
}

std::size_t TcpServer::broadcast(std::string_view topic, std::span<const std::byte> payload,
                                 std::optional<PeerId> skip) {
  const Bytes frame = encode_frame(topic, payload);
  std::vector<std::shared_ptr<Impl::Peer>> targets;
  {
    std::lock_guard lock(impl_->mutex);
    for (auto& [id, peer] : impl_->peers)
      if (peer->ready && (!skip || id != *skip)) targets.push_back(peer);
  }
  std::size_t written = 0;
  for (auto& p : targets) written += impl_->write_frame(*p, frame) ? 1 : 0;
  return written;
}

bool TcpServer::send_to(PeerId peer, std::string_view topic, std::span<const std::byte> payload) {
  std::shared_ptr<Impl::Peer> target;
  {
    std::lock_guard lock(impl_->mutex);
    auto it = impl_->peers.find(peer);
    if (it == impl_->peers.end() || !it->second->ready) return false;
    target = it->second;
  }
  return impl_->write_frame(*target, encode_frame(topic, payload));
}

void TcpServer::stop() {
  std::vector<std::shared_ptr<Impl::Peer>> peers;
  {
    std::lock_guard lock(impl_->mutex);
    if (impl_->stopping) return;
    impl_->stopping = true;
    for (auto& [id, peer] : impl_->peers) peers.push_back(peer);
  }
  ::shutdown(impl_->listen_fd, SHUT_RDWR);
  for (auto& p : peers) ::shutdown(p->fd, SHUT_RDWR);
  std::unique_lock lock(impl_->mutex);
  impl_->idle.wait(lock, [&] { return impl_->running_threads == 0; });
  ::close(impl_->listen_fd);
}

TcpClient::TcpClient(const Address& server) {
  const sockaddr_in sa = to_sockaddr(server);
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) fail("socket");
  if (::connect(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) < 0) {
    const int err = errno;
    ::close(fd_);
    errno = err;
    fail("connect " + server.to_string());
  }
  set_nodelay(fd_);
  write_all(fd_, kConnectionMagic);
  if (!read_magic(fd_)) {
    ::close(fd_);
    throw BusError("peer did not answer with the bus magic");
  }
}

TcpClient::~TcpClient() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpClient::send(std::string_view topic, std::span<const std::byte> payload) {
  write_all(fd_, encode_frame(topic, payload));
}

std::optional<Frame> TcpClient::receive(std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (r < 0) fail("poll");
  if (r == 0) return std::nullopt;
  auto frame = read_frame(fd_, buffer_);
  if (!frame) throw ClosedError();
  return frame;
}

TcpBusBridge::TcpBusBridge(Bus& bus, const Address& listen)
    : bus_(bus), server_(listen, [this](TcpServer::PeerId from, Frame frame) {
        const Payload payload = Payload::adopt(std::move(frame.payload));
        try {
          bus_.publish(Topic(frame.topic), payload);
        } catch (const ClosedError&) {
          return;
        }
        server_.broadcast(frame.topic, payload.bytes(), from);
      }) {}

}  // namespace piedge::bus
