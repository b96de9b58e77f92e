#include "trunksim/trunk/trunk.hpp"

#include <algorithm>
#include <cmath>

namespace trunksim::trunk {

void validate(const TrunkConfig& cfg) {
  if (cfg.rtt_up < 0.0) throw std::invalid_argument("trunk: rtt_up < 0");
  if (cfg.trunk_bw <= 0.0) throw std::invalid_argument("trunk: trunk_bw <= 0");
  if (cfg.pkt_size == 0) throw std::invalid_argument("trunk: pkt_size == 0");
  if (!(cfg.drop_threshold_fraction > 0.0 &&
        cfg.drop_threshold_fraction <= 1.0)) {
    throw std::invalid_argument("trunk: drop_threshold_fraction out of (0,1]");
  }
}

std::size_t trunk_buffer_capacity(const TrunkConfig& cfg) {
  double pkts = cfg.rtt_up * cfg.trunk_bw / cfg.pkt_size;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(pkts)));
}

double drop_probability(std::size_t occupancy, std::size_t threshold,
                        std::size_t capacity) {
  if (occupancy <= threshold) return 0.0;
  if (threshold >= capacity) return 1.0;  // degenerate: threshold == capacity
  return static_cast<double>(occupancy - threshold) /
         static_cast<double>(capacity - threshold);
}

std::uint32_t flow_window_estimate(std::uint32_t trunk_window_pkts,
                                   std::size_t n_active) {
  if (n_active == 0) return trunk_window_pkts;
  return std::max<std::uint32_t>(
      1, trunk_window_pkts / static_cast<std::uint32_t>(n_active));
}

ExemptionThreshold exemption_threshold(std::uint32_t w_per_flow) {
  std::uint64_t w = w_per_flow;
  std::uint64_t x = 3 * w * w / 8;
  return ExemptionThreshold{x, x / 2};
}

TrunkTransmitter::TrunkTransmitter(sim::Engine& engine, net::Network& net,
                                   std::string name, net::FlowKey trunk_key,
                                   TrunkConfig cfg, std::uint64_t root_seed,
                                   TrunkReceiver& receiver,
                                   tcp::RenoConfig trunk_tcp)
    : engine_(engine),
      net_(net),
      name_(std::move(name)),
      cfg_(cfg),
      rng_(root_seed, "trunk:" + name_),
      forwarded_meta_(std::make_shared<std::deque<net::Packet>>()) {
  validate(cfg_);
  capacity_ = trunk_buffer_capacity(cfg_);
  threshold_ = std::clamp<std::size_t>(
      static_cast<std::size_t>(cfg_.drop_threshold_fraction * capacity_), 1,
      capacity_);
  activity_window_ =
      cfg_.activity_window > 0.0 ? cfg_.activity_window : 2.0 * cfg_.rtt_up;
  conn_ = std::make_unique<tcp::TcpSender>(engine_, net_, trunk_key,
                                           trunk_tcp);
  conn_->set_message_provider([this] { return provide_message(); });
  receiver.forwarded_meta_ = forwarded_meta_;
}

TrunkTransmitter::AdmitResult TrunkTransmitter::admit(net::Packet pkt,
                                                      double now) {
  ++counters_.arrivals;

  FlowAccount& acct = accounts_[pkt.key];
  acct.last_seen = now;
  std::uint32_t trunk_w =
      static_cast<std::uint32_t>(conn_->cwnd() / conn_->mss());
  std::uint32_t w = flow_window_estimate(trunk_w, active_flow_count(now));
  acct.exemption_k = exemption_threshold(w).k;

  // A full buffer drops unconditionally; P3 only shields managed drops.
  if (buffer_.size() >= capacity_) {
    ++counters_.tail_drops;
    return AdmitResult::kDroppedTail;
  }

  double p = drop_probability(buffer_.size(), threshold_, capacity_);
  if (p > 0.0) {
    double u = rng_.next_uniform();
    if (u < p && !acct.exempt()) {
      if (acct.forwarded_since_drop < acct.k_at_drop) ++p3_violations_;
      acct.k_at_drop = acct.exemption_k;
      acct.forwarded_since_drop = 0;
      ++counters_.prob_drops;
      return AdmitResult::kDroppedProbabilistic;
    }
  }

  ++acct.in_buffer;
  buffer_.push_back(std::move(pkt));
  pump();

  // Occasionally shed long-idle accounts so closed short flows do not
  // accumulate without bound.
  if ((counters_.arrivals & 0x3FF) == 0) {
    for (auto it = accounts_.begin(); it != accounts_.end();) {
      if (it->second.in_buffer == 0 &&
          it->second.last_seen < now - 10.0 * activity_window_) {
        it = accounts_.erase(it);
      } else {
        ++it;
      }
    }
  }
  return AdmitResult::kEnqueued;
}

std::size_t TrunkTransmitter::active_flow_count(double now) const {
  std::size_t n = 0;
  for (const auto& [key, acct] : accounts_) {
    if (acct.in_buffer >= 1 || acct.last_seen >= now - activity_window_) ++n;
  }
  return n;
}

std::optional<std::vector<std::uint8_t>> TrunkTransmitter::provide_message() {
  if (buffer_.empty()) return std::nullopt;
  net::Packet pkt = std::move(buffer_.front());
  buffer_.pop_front();

  FlowAccount& acct = accounts_[pkt.key];
  if (acct.in_buffer > 0) --acct.in_buffer;
  ++acct.forwarded_since_drop;
  ++counters_.forwarded;

  net::HeaderImage hdr = net::encode_header(pkt.header_fields());
  std::vector<std::uint8_t> body = compressor_.compress(pkt.key, hdr);
  body.resize(body.size() + pkt.payload_size, 0);  // payload stand-in
  std::vector<std::uint8_t> wire = frame(body);

  forwarded_meta_->push_back(std::move(pkt));
  return wire;
}

TrunkReceiver::TrunkReceiver(sim::Engine& engine, net::Network& net,
                             net::FlowKey trunk_key)
    : engine_(engine),
      net_(net),
      trunk_key_(trunk_key),
      sink_(engine, net, trunk_key) {
  sink_.set_consumer([this](std::uint64_t, const std::vector<std::uint8_t>*
                                               bytes) {
    if (bytes != nullptr) on_stream_bytes(*bytes);
  });
}

void TrunkReceiver::on_stream_bytes(const std::vector<std::uint8_t>& bytes) {
  for (std::vector<std::uint8_t>& f : deframer_.feed(bytes)) {
    auto [header, consumed] = decompressor_.decompress(f);
    net::HeaderFields fields = net::decode_header(header);
    std::uint32_t payload = fields.total_len >= net::kHeaderBytes
                                ? fields.total_len - net::kHeaderBytes
                                : 0;
    if (f.size() - consumed != payload) {
      throw CodecError("trunk receiver: frame length mismatch");
    }

    net::Packet pkt;
    pkt.key = fields.key;
    pkt.seq = fields.seq;
    pkt.payload_size = payload;
    pkt.is_ack = (fields.flags & 0x10) != 0;
    pkt.ack_seq = fields.ack;
    pkt.header_layers = 1;
    pkt.ip_id = fields.ip_id;
    pkt.created_at = engine_.now();

    if (forwarded_meta_ && !forwarded_meta_->empty()) {
      const net::Packet& orig = forwarded_meta_->front();
      if (!(orig.header_fields() == fields)) {
        throw CodecError("trunk receiver: restored header mismatch");
      }
      pkt.seq = orig.seq;  // full 64-bit sequence
      pkt.ack_seq = orig.ack_seq;
      pkt.created_at = orig.created_at;
      forwarded_meta_->pop_front();
    }

    ++packets_restored_;
    net_.send(trunk_key_.dst_node, std::move(pkt));
  }
}

}  // namespace trunksim::trunk
