#ifndef TRUNKSIM_TCP_RENO_HPP
#define TRUNKSIM_TCP_RENO_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "trunksim/net/network.hpp"
#include "trunksim/net/packet.hpp"
#include "trunksim/sim/engine.hpp"

namespace trunksim::tcp {

struct RenoConfig {
  std::uint32_t mss = 1460;           // payload bytes per full segment
  std::uint32_t initial_cwnd_segments = 1;
  std::uint32_t initial_ssthresh_segments = 64;
  double rto_min = 0.2;
  double rto_max = 64.0;
  double initial_rto = 1.0;
};

// Reno sender: slow start, congestion avoidance, fast retransmit + fast
// recovery on three duplicate ACKs, RTO with Jacobson/Karels estimators and
// Karn's rule. Data flows one way; the peer TcpSink returns cumulative ACKs.
//
// Two application modes:
//  - byte mode: enqueue_bytes()/set_unbounded(); segments are min(mss, rest).
//  - message mode: a pull callback supplies framed byte blobs, one blob per
//    segment (the trunk's one-user-packet-per-segment discipline).
class TcpSender {
 public:
  // Pull source for message mode; returning nullopt means nothing to send.
  using MessageProvider =
      std::function<std::optional<std::vector<std::uint8_t>>()>;

  TcpSender(sim::Engine& engine, net::Network& net, net::FlowKey key,
            RenoConfig cfg = {});
  ~TcpSender();

  TcpSender(const TcpSender&) = delete;
  TcpSender& operator=(const TcpSender&) = delete;

  const net::FlowKey& key() const { return key_; }

  void enqueue_bytes(std::uint64_t n);
  void set_unbounded() { unbounded_ = true; }
  void set_message_provider(MessageProvider p) {
    message_provider_ = std::move(p);
  }

  // Sends whatever the window currently permits.
  void maybe_send();

  void on_ack(const net::Packet& ack);

  // Cancels timers and unbinds the reverse-flow handler.
  void close();

  // Halves cwnd in place without touching ssthresh; used to exercise the
  // transient a trunk buffer must absorb.
  void force_window_halving();

  std::uint64_t cwnd() const { return cwnd_; }
  std::uint64_t ssthresh() const { return ssthresh_; }
  std::uint64_t snd_una() const { return snd_una_; }
  std::uint64_t snd_nxt() const { return snd_nxt_; }
  std::uint64_t flight() const { return snd_nxt_ - snd_una_; }
  bool in_recovery() const { return in_recovery_; }
  std::uint32_t dup_acks() const { return dup_acks_; }
  double srtt() const { return srtt_; }
  double rto() const { return rto_; }
  std::uint32_t mss() const { return cfg_.mss; }
  std::uint64_t bytes_acked() const { return snd_una_; }
  std::uint32_t timeouts() const { return timeouts_; }
  std::uint32_t fast_retransmits() const { return fast_retransmits_; }

  // Fires once snd_una reaches `target`.
  void notify_when_acked(std::uint64_t target, std::function<void()> cb);

  // Fired whenever a segment is handed to the network for the first time
  // (not on retransmission). The trunk uses this for P3 accounting.
  std::function<void()> on_first_transmit;

 private:
  struct SegRec {
    std::uint64_t seq;
    std::uint32_t len;
    bool retransmitted = false;
    std::shared_ptr<const std::vector<std::uint8_t>> wire;  // message mode
  };

  bool has_app_data() const;
  std::optional<SegRec> next_segment();
  void transmit(SegRec& seg, bool retransmission);
  void enter_fast_retransmit();
  void on_timeout();
  void arm_rto();
  void disarm_rto();
  void rtt_update(double sample);
  void check_acked_notify();

  sim::Engine& engine_;
  net::Network& net_;
  net::FlowKey key_;
  RenoConfig cfg_;

  std::uint64_t cwnd_;
  std::uint64_t ssthresh_;
  std::uint64_t snd_una_ = 0;
  std::uint64_t snd_nxt_ = 0;
  std::uint64_t recover_point_ = 0;
  std::uint64_t retx_high_ = 0;  // seqs below this are retransmissions
  std::uint64_t snd_max_ = 0;    // highest sequence ever sent
  std::uint32_t dup_acks_ = 0;
  bool in_recovery_ = false;

  std::uint64_t bytes_pending_ = 0;
  bool unbounded_ = false;
  MessageProvider message_provider_;
  std::deque<std::vector<std::uint8_t>> requeued_messages_;

  std::deque<SegRec> unacked_;

  double srtt_ = 0.0;
  double rttvar_ = 0.0;
  bool have_rtt_ = false;
  double rto_;
  std::optional<sim::Engine::EventId> rto_timer_;
  // One outstanding RTT sample at a time (per Karn: fresh segments only).
  std::optional<std::pair<std::uint64_t, double>> rtt_probe_;  // (end_seq, t)

  std::uint16_t next_ip_id_ = 0;
  std::uint32_t timeouts_ = 0;
  std::uint32_t fast_retransmits_ = 0;
  bool sending_ = false;  // re-entrancy guard for maybe_send
  bool closed_ = false;

  std::vector<std::pair<std::uint64_t, std::function<void()>>> ack_waiters_;
};

// In-order reassembling receiver. Emits one cumulative ACK per arriving data
// segment (no delayed ACKs) and hands in-order payload to the consumer.
class TcpSink {
 public:
  // `bytes` is empty for byte-mode flows even when `len` > 0.
  using Consumer = std::function<void(
      std::uint64_t new_in_order_bytes,
      const std::vector<std::uint8_t>* bytes)>;

  TcpSink(sim::Engine& engine, net::Network& net, net::FlowKey data_key);
  ~TcpSink();

  TcpSink(const TcpSink&) = delete;
  TcpSink& operator=(const TcpSink&) = delete;

  void set_consumer(Consumer c) { consumer_ = std::move(c); }
  void close();

  std::uint64_t rcv_nxt() const { return rcv_nxt_; }
  std::uint64_t delivered_bytes() const { return rcv_nxt_; }

 private:
  void on_data(const net::Packet& pkt);
  void send_ack();

  sim::Engine& engine_;
  net::Network& net_;
  net::FlowKey key_;
  std::uint64_t rcv_nxt_ = 0;
  // Out-of-order segments by start seq.
  std::map<std::uint64_t,
           std::pair<std::uint32_t,
                     std::shared_ptr<const std::vector<std::uint8_t>>>>
      ooo_;
  Consumer consumer_;
  std::uint16_t next_ip_id_ = 0;
  bool closed_ = false;
};

}  // namespace trunksim::tcp

#endif  // TRUNKSIM_TCP_RENO_HPP
