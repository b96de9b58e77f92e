#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "trunksim/tcp/reno.hpp"

using namespace trunksim;

namespace {

constexpr std::uint32_t kMss = 1460;

// Two hosts joined by a symmetric link; captures every data packet that
// reaches the sink side.
struct Pair {
  sim::Engine engine;
  net::Network net{engine};
  net::NodeId a, b;
  net::FlowKey key;

  explicit Pair(double bw = 1e8, double prop = 0.05, std::size_t cap = 1000)
      : a(net.add_node("a")), b(net.add_node("b")) {
    net.add_link("ab", a, b, bw, prop, cap);
    net.add_link("ba", b, a, bw, prop, cap);
    net.build_routes();
    key = {a, b, 1000, 80, net::Proto::kTcp};
  }
};

net::Packet ack_packet(const net::FlowKey& data_key, std::uint64_t ack_seq) {
  net::Packet p;
  p.key = data_key.reversed();
  p.is_ack = true;
  p.ack_seq = ack_seq;
  return p;
}

}  // namespace

TEST_CASE("open starts with one mss of congestion window") {
  Pair p;
  tcp::TcpSender s(p.engine, p.net, p.key);
  CHECK(s.cwnd() == kMss);
  CHECK(s.ssthresh() == 64ull * kMss);
}

TEST_CASE("mss of zero is rejected") {
  Pair p;
  tcp::RenoConfig cfg;
  cfg.mss = 0;
  CHECK_THROWS_AS(tcp::TcpSender(p.engine, p.net, p.key, cfg),
                  std::invalid_argument);
}

TEST_CASE("duplicate flow keys cannot coexist") {
  Pair p;
  tcp::TcpSender s1(p.engine, p.net, p.key);
  CHECK_THROWS_AS(tcp::TcpSender(p.engine, p.net, p.key), std::logic_error);
}

TEST_CASE("two senders with distinct keys have independent state") {
  Pair p;
  net::FlowKey k2 = p.key;
  k2.src_port = 1001;
  tcp::TcpSender s1(p.engine, p.net, p.key);
  tcp::TcpSender s2(p.engine, p.net, k2);
  s1.on_ack(ack_packet(p.key, 0));  // harmless duplicate-of-nothing
  s1.enqueue_bytes(kMss);
  CHECK(s1.snd_nxt() == kMss);
  CHECK(s2.snd_nxt() == 0);
}

TEST_CASE("slow start: a new ack grows cwnd by one mss") {
  Pair p;
  tcp::TcpSender s(p.engine, p.net, p.key);
  s.enqueue_bytes(10 * kMss);
  CHECK(s.flight() == kMss);  // window limit: one segment out
  s.on_ack(ack_packet(p.key, kMss));
  CHECK(s.cwnd() == 2ull * kMss);
}

TEST_CASE("window limit: cwnd of 2 mss emits exactly two segments") {
  Pair p;
  tcp::TcpSender s(p.engine, p.net, p.key);
  s.enqueue_bytes(10 * kMss);
  s.on_ack(ack_packet(p.key, kMss));  // cwnd -> 2 mss
  CHECK(s.flight() == 2ull * kMss);
  s.maybe_send();  // flight == cwnd: nothing more
  CHECK(s.flight() == 2ull * kMss);
}

TEST_CASE("short tail: 100 bytes remaining yields a 140-byte packet") {
  Pair p;
  std::vector<net::Packet> got;
  p.net.node(p.b).bind(p.key, [&](const net::Packet& pk) {
    got.push_back(pk);
  });
  tcp::TcpSender s(p.engine, p.net, p.key);
  s.enqueue_bytes(100);
  p.engine.run(1.0);
  REQUIRE(got.size() == 1);
  CHECK(got[0].payload_size == 100);
  CHECK(got[0].size_total() == 140);
}

TEST_CASE("third duplicate ack halves the flight into ssthresh") {
  Pair p;
  tcp::TcpSender s(p.engine, p.net, p.key);
  s.set_unbounded();
  s.maybe_send();
  // Grow to flight = 10 mss via clean acks.
  for (int i = 1; i <= 9; ++i) {
    s.on_ack(ack_packet(p.key, static_cast<std::uint64_t>(i) * kMss));
  }
  REQUIRE(s.flight() == 10ull * kMss);
  std::uint64_t una = s.snd_una();
  s.on_ack(ack_packet(p.key, una));
  s.on_ack(ack_packet(p.key, una));
  CHECK(s.dup_acks() == 2);
  CHECK_FALSE(s.in_recovery());
  s.on_ack(ack_packet(p.key, una));
  CHECK(s.in_recovery());
  CHECK(s.ssthresh() == 5ull * kMss);
  CHECK(s.cwnd() == 8ull * kMss);  // ssthresh + 3 mss inflation
  CHECK(s.fast_retransmits() == 1);
}

TEST_CASE("duplicate ack leaves snd_una in place") {
  Pair p;
  tcp::TcpSender s(p.engine, p.net, p.key);
  s.enqueue_bytes(5 * kMss);
  s.on_ack(ack_packet(p.key, kMss));
  std::uint64_t una = s.snd_una();
  s.on_ack(ack_packet(p.key, una));
  CHECK(s.snd_una() == una);
  CHECK(s.dup_acks() == 1);
}

TEST_CASE("recovery inflates by one mss per further dup ack") {
  Pair p;
  tcp::TcpSender s(p.engine, p.net, p.key);
  s.set_unbounded();
  s.maybe_send();
  for (int i = 1; i <= 9; ++i) {
    s.on_ack(ack_packet(p.key, static_cast<std::uint64_t>(i) * kMss));
  }
  std::uint64_t una = s.snd_una();
  for (int i = 0; i < 3; ++i) s.on_ack(ack_packet(p.key, una));
  std::uint64_t cw = s.cwnd();
  s.on_ack(ack_packet(p.key, una));
  CHECK(s.cwnd() == cw + kMss);
}

TEST_CASE("recovery exits at the recover point with cwnd = ssthresh") {
  Pair p;
  tcp::TcpSender s(p.engine, p.net, p.key);
  s.set_unbounded();
  s.maybe_send();
  for (int i = 1; i <= 9; ++i) {
    s.on_ack(ack_packet(p.key, static_cast<std::uint64_t>(i) * kMss));
  }
  std::uint64_t una = s.snd_una();
  std::uint64_t recover = s.snd_nxt();
  for (int i = 0; i < 3; ++i) s.on_ack(ack_packet(p.key, una));
  REQUIRE(s.in_recovery());
  s.on_ack(ack_packet(p.key, recover));
  CHECK_FALSE(s.in_recovery());
  CHECK(s.cwnd() == 5ull * kMss);
}

TEST_CASE("timeout: ssthresh = flight/2, cwnd back to one mss") {
  Pair p(1e8, 0.05, 1000);
  tcp::TcpSender s(p.engine, p.net, p.key);
  s.set_unbounded();
  s.maybe_send();
  for (int i = 1; i <= 7; ++i) {
    s.on_ack(ack_packet(p.key, static_cast<std::uint64_t>(i) * kMss));
  }
  REQUIRE(s.flight() == 8ull * kMss);
  // The synthetic instant acks drove rto to its 0.2 s floor; the sink never
  // answers, so exactly the first RTO fires inside this window.
  double t = p.engine.now();
  p.engine.run(t + 0.3);
  CHECK(s.timeouts() == 1);
  CHECK(s.ssthresh() == 4ull * kMss);
  CHECK(s.cwnd() == kMss);
}

TEST_CASE("consecutive timeouts back off the rto exponentially") {
  // No receiver bound: data vanishes at the far host, acks never come.
  Pair p(1e8, 0.001, 1000);
  tcp::RenoConfig cfg;
  cfg.initial_rto = 0.4;
  tcp::TcpSender s(p.engine, p.net, p.key, cfg);
  s.enqueue_bytes(kMss);
  p.engine.run(0.39);
  CHECK(s.timeouts() == 0);
  CHECK(s.rto() == doctest::Approx(0.4));
  p.engine.run(0.41);
  CHECK(s.timeouts() == 1);
  CHECK(s.rto() == doctest::Approx(0.8));
  p.engine.run(1.3);
  CHECK(s.timeouts() == 2);
  CHECK(s.rto() == doctest::Approx(1.6));
}

TEST_CASE("timeout with nothing in flight is a no-op") {
  Pair p;
  tcp::TcpSender s(p.engine, p.net, p.key);
  p.engine.run(10.0);
  CHECK(s.timeouts() == 0);
  CHECK(s.cwnd() == kMss);
}

TEST_CASE("first rtt sample initializes the estimators") {
  // Negligible serialization, 50 ms propagation each way -> rtt ~= 0.1 s.
  Pair p(1e9, 0.05, 1000);
  tcp::TcpSink sink(p.engine, p.net, p.key);
  tcp::TcpSender s(p.engine, p.net, p.key);
  s.enqueue_bytes(kMss);
  p.engine.run(1.0);
  CHECK(s.srtt() == doctest::Approx(0.1).epsilon(0.01));
  CHECK(s.rto() == doctest::Approx(0.3).epsilon(0.01));
}

TEST_CASE("constant rtt samples converge rto to the floor") {
  Pair p(1e9, 0.05, 1000);
  tcp::TcpSink sink(p.engine, p.net, p.key);
  tcp::TcpSender s(p.engine, p.net, p.key);
  s.enqueue_bytes(200 * kMss);
  p.engine.run(60.0);
  CHECK(s.srtt() == doctest::Approx(0.1).epsilon(0.01));
  CHECK(s.rto() == doctest::Approx(0.2).epsilon(0.01));  // rto_min binds
}

TEST_CASE("ack beyond snd_nxt is a protocol violation") {
  Pair p;
  tcp::TcpSender s(p.engine, p.net, p.key);
  s.enqueue_bytes(kMss);
  CHECK_THROWS_AS(s.on_ack(ack_packet(p.key, 5 * kMss)), std::logic_error);
}

TEST_CASE("loss-free transfer delivers every byte without retransmission") {
  Pair p(1'000'000.0, 0.01, 1000);
  tcp::TcpSink sink(p.engine, p.net, p.key);
  tcp::TcpSender s(p.engine, p.net, p.key);
  const std::uint64_t total = 200 * kMss;
  s.enqueue_bytes(total);
  p.engine.run(60.0);
  CHECK(sink.delivered_bytes() == total);
  CHECK(s.timeouts() == 0);
  CHECK(s.fast_retransmits() == 0);
  CHECK(s.bytes_acked() == total);
}

TEST_CASE("slow start doubles the window each rtt on a clean path") {
  Pair p(1e9, 0.05, 1000);  // rtt ~= 0.1 s, serialization negligible
  tcp::TcpSink sink(p.engine, p.net, p.key);
  tcp::TcpSender s(p.engine, p.net, p.key);
  s.set_unbounded();
  s.maybe_send();
  // After k full rtts, cwnd ~= 2^k mss (within one segment).
  for (int k = 1; k <= 5; ++k) {
    p.engine.run(k * 0.1 + 0.05);
    double segs = static_cast<double>(s.cwnd()) / kMss;
    CHECK(segs == doctest::Approx(std::pow(2.0, k)).epsilon(0.3));
  }
}

TEST_CASE("a single dropped packet is recovered and all data arrives") {
  Pair p(1'000'000.0, 0.01, 1000);
  // Drop exactly the 20th data packet on its way in.
  int seen = 0;
  bool dropped = false;
  // Intercept on the sink node consumes the packet once.
  // (Interception happens before local delivery only for transit packets,
  // so drop at the sender side instead via a transit router.)
  sim::Engine& e = p.engine;
  net::Network net2{e};
  auto a = net2.add_node("a");
  auto r = net2.add_node("r");
  auto b = net2.add_node("b");
  net2.add_link("ar", a, r, 1'000'000.0, 0.005, 1000);
  net2.add_link("ra", r, a, 1'000'000.0, 0.005, 1000);
  net2.add_link("rb", r, b, 1'000'000.0, 0.005, 1000);
  net2.add_link("br", b, r, 1'000'000.0, 0.005, 1000);
  net2.build_routes();
  net::FlowKey key{a, b, 1, 80, net::Proto::kTcp};
  net2.node(r).set_intercept([&](net::Packet& pk) {
    if (!pk.is_ack && pk.key == key) {
      ++seen;
      if (seen == 20 && !dropped) {
        dropped = true;
        return true;  // swallow it
      }
    }
    return false;
  });
  tcp::TcpSink sink(e, net2, key);
  tcp::TcpSender s(e, net2, key);
  const std::uint64_t total = 100 * kMss;
  s.enqueue_bytes(total);
  e.run(60.0);
  CHECK(dropped);
  CHECK(sink.delivered_bytes() == total);
  CHECK(s.fast_retransmits() + s.timeouts() >= 1);
}

TEST_CASE("delivery stays monotone and loss-bounded under congestion") {
  // Narrow link and a short queue: drops and retransmissions are guaranteed.
  Pair p(200'000.0, 0.02, 8);
  tcp::TcpSink sink(p.engine, p.net, p.key);
  tcp::TcpSender s(p.engine, p.net, p.key);
  const std::uint64_t total = 2000 * kMss;
  s.enqueue_bytes(total);
  std::uint64_t last = 0;
  bool monotone = true;
  std::function<void()> watch = [&] {
    if (sink.delivered_bytes() < last) monotone = false;
    last = sink.delivered_bytes();
    if (p.engine.now() < 30.0) p.engine.schedule_in(0.05, watch);
  };
  p.engine.schedule(0.0, watch);
  p.engine.run(30.0);
  CHECK(monotone);
  CHECK(s.fast_retransmits() + s.timeouts() >= 1);
  // Goodput cannot exceed the link and the sink never runs ahead of acks.
  CHECK(sink.delivered_bytes() <= 30.0 * 200'000.0);
  CHECK(s.bytes_acked() <= sink.delivered_bytes());
}
