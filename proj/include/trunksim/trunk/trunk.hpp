#ifndef TRUNKSIM_TRUNK_TRUNK_HPP
#define TRUNKSIM_TRUNK_TRUNK_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "trunksim/net/network.hpp"
#include "trunksim/net/packet.hpp"
#include "trunksim/sim/engine.hpp"
#include "trunksim/tcp/reno.hpp"
#include "trunksim/trunk/codec.hpp"

namespace trunksim::trunk {

enum class TrunkClass { kTcpTrunk, kUdpTrunk };

// TCP and UDP user flows ride separate trunks.
inline TrunkClass classify(const net::Packet& pkt) {
  return pkt.key.proto == net::Proto::kUdp ? TrunkClass::kUdpTrunk
                                           : TrunkClass::kTcpTrunk;
}

struct TrunkConfig {
  double rtt_up = 0.1;         // upper estimate of user-flow RTTs, seconds
  double trunk_bw = 0.0;       // target peak trunk bandwidth, bytes/second
  std::uint32_t pkt_size = 1500;  // nominal user packet, bytes
  double drop_threshold_fraction = 0.5;
  double activity_window = 0.0;   // <= 0 means 2 * rtt_up

  bool operator==(const TrunkConfig&) const = default;
};

void validate(const TrunkConfig& cfg);

// Buffer holds one upper-RTT's worth of traffic at the target bandwidth,
// never less than one packet.
std::size_t trunk_buffer_capacity(const TrunkConfig& cfg);

// 0 at or below threshold, linear ramp above it, exactly 1 at capacity.
double drop_probability(std::size_t occupancy, std::size_t threshold,
                        std::size_t capacity);

// Per-flow window estimate W/N in packets (floor, minimum 1; W itself when
// no flows are active).
std::uint32_t flow_window_estimate(std::uint32_t trunk_window_pkts,
                                   std::size_t n_active);

struct ExemptionThreshold {
  std::uint64_t x;  // packets a flow sends through one recovery epoch
  std::uint64_t k;  // packets to forward before the next managed drop
};

// X = floor(3*w^2/8), K = floor(X/2).
ExemptionThreshold exemption_threshold(std::uint32_t w_per_flow);

struct FlowAccount {
  std::uint64_t forwarded_since_drop = 0;
  std::uint64_t exemption_k = 0;  // refreshed on every arrival
  std::uint64_t k_at_drop = 0;    // K in force at the last managed drop
  double last_seen = 0.0;
  std::uint32_t in_buffer = 0;

  bool exempt() const {
    return forwarded_since_drop < std::max(exemption_k, k_at_drop);
  }
};

struct TrunkCounters {
  std::uint64_t arrivals = 0;
  std::uint64_t prob_drops = 0;
  std::uint64_t tail_drops = 0;
  std::uint64_t forwarded = 0;

  std::uint64_t drops() const { return prob_drops + tail_drops; }
  double drop_rate() const {
    return arrivals == 0 ? 0.0 : static_cast<double>(drops()) / arrivals;
  }
};

class TrunkReceiver;

// The trunk-side transmitter: classification already done by the caller,
// this applies P1 (buffer sizing), P2 (probabilistic drop above threshold),
// P3 (per-flow drop exemption), then compresses, frames, and pumps buffered
// user packets through the trunk's own TCP connection.
class TrunkTransmitter {
 public:
  enum class AdmitResult { kEnqueued, kDroppedProbabilistic, kDroppedTail };

  TrunkTransmitter(sim::Engine& engine, net::Network& net, std::string name,
                   net::FlowKey trunk_key, TrunkConfig cfg,
                   std::uint64_t root_seed, TrunkReceiver& receiver,
                   tcp::RenoConfig trunk_tcp = {});

  AdmitResult admit(net::Packet pkt, double now);

  // Sends whatever the trunk window permits.
  void pump() { conn_->maybe_send(); }

  std::size_t active_flow_count(double now) const;

  std::size_t occupancy() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t threshold() const { return threshold_; }
  const TrunkConfig& config() const { return cfg_; }
  const std::string& name() const { return name_; }
  const TrunkCounters& counters() const { return counters_; }
  tcp::TcpSender& conn() { return *conn_; }
  const tcp::TcpSender& conn() const { return *conn_; }
  std::uint64_t p3_violations() const { return p3_violations_; }

  // arrivals = drops + forwarded + buffered
  bool conserved() const {
    return counters_.arrivals ==
           counters_.drops() + counters_.forwarded + buffer_.size();
  }

 private:
  friend class TrunkReceiver;

  std::optional<std::vector<std::uint8_t>> provide_message();

  sim::Engine& engine_;
  net::Network& net_;
  std::string name_;
  TrunkConfig cfg_;
  std::size_t capacity_;
  std::size_t threshold_;
  double activity_window_;

  std::deque<net::Packet> buffer_;
  std::map<net::FlowKey, FlowAccount> accounts_;
  HeaderCompressor compressor_;
  sim::RandomStream rng_;
  std::unique_ptr<tcp::TcpSender> conn_;
  TrunkCounters counters_;
  std::uint64_t p3_violations_ = 0;

  // Admission-order provenance of forwarded packets, consumed by the
  // receiver to restore per-packet timestamps the wire cannot carry.
  std::shared_ptr<std::deque<net::Packet>> forwarded_meta_;
};

// Far end of the trunk: reassembled trunk bytes -> deframe -> decompress ->
// re-emit the original user packets at the receiver node.
class TrunkReceiver {
 public:
  TrunkReceiver(sim::Engine& engine, net::Network& net,
                net::FlowKey trunk_key);

  std::uint64_t packets_restored() const { return packets_restored_; }

 private:
  friend class TrunkTransmitter;

  void on_stream_bytes(const std::vector<std::uint8_t>& bytes);

  sim::Engine& engine_;
  net::Network& net_;
  net::FlowKey trunk_key_;
  tcp::TcpSink sink_;
  Deframer deframer_;
  HeaderDecompressor decompressor_;
  std::shared_ptr<std::deque<net::Packet>> forwarded_meta_;
  std::uint64_t packets_restored_ = 0;
};

}  // namespace trunksim::trunk

#endif  // TRUNKSIM_TRUNK_TRUNK_HPP
