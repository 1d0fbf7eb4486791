#include <gtest/gtest.h>

#include <chrono>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "mavi/teleop/server.hpp"

using namespace mavi::teleop;
namespace net = boost::asio;
namespace websocket = boost::beast::websocket;
using tcp = net::ip::tcp;

namespace {

const char* kRoom =
    "wall -2 -2 2 -2\nwall 2 -2 2 2\nwall 2 2 -2 2\nwall -2 2 -2 -2\nstart 0 0 0\nseed 7\n";

struct Live {
  explicit Live(std::size_t capacity = 1024) : session(StationConfig{}, kRoom), server(session, {"127.0.0.1", 0}, capacity) {
    server.start();
  }
  void tick(int n = 1) {
    for (int i = 0; i < n; ++i) {
      server.pump_inbound();
      session.tick();
    }
  }
  // Ticks until pred holds or about two wall seconds pass.
  template <typename F>
  bool tick_until(F pred) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
    while (!pred()) {
      if (std::chrono::steady_clock::now() > deadline) return false;
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
      tick();
    }
    return true;
  }
  Session session;
  TeleopServer server;
};

tcp::socket connect(net::io_context& ioc, std::uint16_t port) {
  tcp::socket s(ioc);
  s.connect({net::ip::make_address("127.0.0.1"), port});
  return s;
}

// Reads lines until one decodes to the wanted topic (at most 5000 lines).
std::optional<Envelope> read_topic(tcp::socket& s, net::streambuf& buf, const std::string& topic) {
  for (int i = 0; i < 5000; ++i) {
    net::read_until(s, buf, '\n');
    std::istream in(&buf);
    std::string line;
    std::getline(in, line);
    const Envelope e = decode_envelope(line);
    if (e.topic == topic) return e;
  }
  return std::nullopt;
}

}  // namespace

TEST(BoundedQueue, DropsOldestWhenFull) {
  BoundedQueue<int> q(3);
  for (int i = 1; i <= 5; ++i) q.push(i);
  EXPECT_EQ(q.size(), 3u);
  EXPECT_EQ(q.dropped(), 2u);
  EXPECT_EQ(q.pop(), 3);
  EXPECT_EQ(q.pop(), 4);
  EXPECT_EQ(q.pop(), 5);
  EXPECT_FALSE(q.pop());
}

TEST(ListenAddress, Parses) {
  const auto a = parse_listen("0.0.0.0:9000");
  EXPECT_EQ(a.host, "0.0.0.0");
  EXPECT_EQ(a.port, 9000);
  EXPECT_EQ(parse_listen(":7").host, "127.0.0.1");
  EXPECT_THROW(parse_listen("localhost"), ServerError);
  EXPECT_THROW(parse_listen("h:99999"), ServerError);
  EXPECT_THROW(parse_listen("h:12ab"), ServerError);
}

TEST(Server, PortInUseIsAnError) {
  Live a;
  Session other(StationConfig{}, kRoom);
  EXPECT_THROW(TeleopServer(other, {"127.0.0.1", a.server.port()}, 16), ServerError);
}

TEST(Server, TcpClientCommandsAndTelemetry) {
  Live live;
  net::io_context ioc;
  auto s = connect(ioc, live.server.port());
  const std::string cmd = encode_envelope({"cmd_baseline", 0.0, 0, {{"mm", 62.0}}});
  net::write(s, net::buffer(cmd + "this is not json\n"));
  ASSERT_TRUE(live.tick_until([&] { return live.session.station().delivered() == 1; }));
  live.tick(20);
  net::streambuf buf;
  const auto err = read_topic(s, buf, "error");
  ASSERT_TRUE(err);
  EXPECT_EQ(err->payload["code"], "decode-error");
  const auto ptru = read_topic(s, buf, "ptru_state");
  ASSERT_TRUE(ptru);
  EXPECT_DOUBLE_EQ(ptru->payload["baseline_mm"].get<double>(), 62.0);
}

TEST(Server, SilentTcpClientStillReceivesTelemetry) {
  Live live;
  net::io_context ioc;
  auto s = connect(ioc, live.server.port());
  ASSERT_TRUE(live.tick_until([&] { return live.server.clients() == 1; }));
  live.tick(1);
  net::streambuf buf;
  EXPECT_TRUE(read_topic(s, buf, "joint_states"));
}

TEST(Server, WebSocketCarriesOneEnvelopePerMessage) {
  Live live;
  net::io_context ioc;
  websocket::stream<tcp::socket> ws(ioc);
  ws.next_layer().connect({net::ip::make_address("127.0.0.1"), live.server.port()});
  ws.handshake("127.0.0.1", "/");
  ws.text(true);
  const std::string cmd = encode_envelope({"cmd_head", 0.0, 0, {{"orientation", {1.0, 0.0, 0.0, 0.0}}}});
  ws.write(net::buffer(cmd.data(), cmd.size() - 1));
  ASSERT_TRUE(live.tick_until([&] { return live.session.station().delivered() == 1; }));
  live.tick(5);
  bool saw_joint_states = false;
  for (int i = 0; i < 200 && !saw_joint_states; ++i) {
    boost::beast::flat_buffer b;
    ws.read(b);
    const std::string msg = boost::beast::buffers_to_string(b.data());
    ASSERT_EQ(msg.find('\n'), std::string::npos);
    saw_joint_states = decode_envelope(msg).topic == "joint_states";
  }
  EXPECT_TRUE(saw_joint_states);
}

TEST(Server, StalledClientNeverBlocksTheTick) {
  Live live(8);
  net::io_context ioc;
  tcp::socket s(ioc);
  s.open(tcp::v4());
  s.set_option(net::socket_base::receive_buffer_size(1024));
  s.connect({net::ip::make_address("127.0.0.1"), live.server.port()});
  ASSERT_TRUE(live.tick_until([&] { return live.server.clients() == 1; }));
  const auto start = std::chrono::steady_clock::now();
  live.tick(3000);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(30));
  EXPECT_GE(live.session.station().ticks(), 3000u);
  // Roughly 5 MB of telemetry against a 1 KiB receive window and an 8-line queue.
  EXPECT_GT(live.server.dropped_outbound(), 0u);
}
