#include "piedge/tcp.hpp"

#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdlib>
#include <thread>

namespace piedge::bus {
namespace {

using namespace std::chrono_literals;

void wait_for_peers(const TcpServer& server, std::size_t n) {
  for (int i = 0; i < 500 && server.peer_count() < n; ++i) std::this_thread::sleep_for(2ms);
  ASSERT_EQ(server.peer_count(), n);
}

TEST(Address, ParseAndEnv) {
  const auto a = Address::parse("127.0.0.1:9001");
  EXPECT_EQ(a.host, "127.0.0.1");
  EXPECT_EQ(a.port, 9001);
  EXPECT_THROW(Address::parse("nope"), BusError);
  EXPECT_THROW(Address::parse("1.2.3.4:99999"), BusError);
  EXPECT_THROW(Address::parse("not-an-ip:80"), BusError);

  ::setenv(kAddressEnv, "127.0.0.1:7555", 1);
  EXPECT_EQ(address_from_env().port, 7555);
  ::unsetenv(kAddressEnv);
  EXPECT_EQ(address_from_env(Address{"127.0.0.1", 42}).port, 42);
}

TEST(Tcp, EchoRoundTrip) {
  TcpServer* self = nullptr;
  TcpServer server({"127.0.0.1", 0}, [&](TcpServer::PeerId peer, Frame f) { self->send_to(peer, f.topic, f.payload); });
  self = &server;
  TcpClient client({"127.0.0.1", server.port()});
  const Bytes big(1 << 20, std::byte{7});
  client.send("echo", big);
  const auto reply = client.receive(5s);
  ASSERT_TRUE(reply);
  EXPECT_EQ(reply->topic, "echo");
  EXPECT_EQ(reply->payload, big);
  EXPECT_FALSE(client.receive(10ms));
}

TEST(Tcp, BroadcastReachesEveryPeer) {
  TcpServer server({"127.0.0.1", 0}, [](TcpServer::PeerId, Frame) {});
  TcpClient a({"127.0.0.1", server.port()}), b({"127.0.0.1", server.port()});
  wait_for_peers(server, 2);
  EXPECT_EQ(server.broadcast("cam", to_bytes("frame")), 2u);
  EXPECT_EQ(a.receive(2s)->payload, to_bytes("frame"));
  EXPECT_EQ(b.receive(2s)->payload, to_bytes("frame"));
}

TEST(Tcp, StopClosesClients) {
  auto server = std::make_unique<TcpServer>(Address{"127.0.0.1", 0}, [](TcpServer::PeerId, Frame) {});
  TcpClient client({"127.0.0.1", server->port()});
  wait_for_peers(*server, 1);
  server->stop();
  EXPECT_THROW(client.receive(2s), ClosedError);
}

TEST(Tcp, RejectsPeerWithoutMagic) {
  TcpServer server({"127.0.0.1", 0}, [](TcpServer::PeerId, Frame) {});
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(server.port());
  ::inet_pton(AF_INET, "127.0.0.1", &sa.sin_addr);
  ASSERT_EQ(::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa), 0);
  const char junk[2] = {'G', 'E'};
  ASSERT_EQ(::send(fd, junk, 2, 0), 2);
  char buf[16];
  // Server sends its magic, then hangs up.
  ssize_t total = 0, n;
  while ((n = ::recv(fd, buf, sizeof buf, 0)) > 0) total += n;
  EXPECT_EQ(total, 2);
  EXPECT_EQ(server.peer_count(), 0u);
  ::close(fd);
}

TEST(TcpBridge, PublishesLocallyAndRelays) {
  Bus bus;
  auto local = bus.subscribe(Topic("lidar"));
  TcpBusBridge bridge(bus, {"127.0.0.1", 0});
  TcpClient sender({"127.0.0.1", bridge.port()}), listener({"127.0.0.1", bridge.port()});
  for (int i = 0; i < 500 && bridge.peer_count() < 2; ++i) std::this_thread::sleep_for(2ms);
  sender.send("lidar", to_bytes("scan"));
  const auto env = local.next_message(2s);
  ASSERT_TRUE(env);
  EXPECT_EQ(env->payload.text(), "scan");
  const auto relayed = listener.receive(2s);
  ASSERT_TRUE(relayed);
  EXPECT_EQ(relayed->payload, to_bytes("scan"));
  EXPECT_FALSE(sender.receive(50ms));
}

}  // namespace
}  // namespace piedge::bus
