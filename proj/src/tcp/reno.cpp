#include "trunksim/tcp/reno.hpp"

#include <algorithm>
#include <cmath>

namespace trunksim::tcp {

TcpSender::TcpSender(sim::Engine& engine, net::Network& net, net::FlowKey key,
                     RenoConfig cfg)
    : engine_(engine), net_(net), key_(key), cfg_(cfg) {
  if (cfg_.mss == 0) {
    throw std::invalid_argument("TcpSender: mss must be > 0");
  }
  cwnd_ = static_cast<std::uint64_t>(cfg_.initial_cwnd_segments) * cfg_.mss;
  ssthresh_ =
      static_cast<std::uint64_t>(cfg_.initial_ssthresh_segments) * cfg_.mss;
  rto_ = cfg_.initial_rto;
  net_.node(key_.src_node).bind(key_.reversed(), [this](const net::Packet& p) {
    on_ack(p);
  });
}

TcpSender::~TcpSender() { close(); }

void TcpSender::close() {
  if (closed_) return;
  closed_ = true;
  disarm_rto();
  net_.node(key_.src_node).unbind(key_.reversed());
}

void TcpSender::enqueue_bytes(std::uint64_t n) {
  bytes_pending_ += n;
  maybe_send();
}

bool TcpSender::has_app_data() const {
  if (!requeued_messages_.empty()) return true;
  if (message_provider_) return true;  // provider decides on pull
  return unbounded_ || bytes_pending_ > 0;
}

std::optional<TcpSender::SegRec> TcpSender::next_segment() {
  if (!requeued_messages_.empty()) {
    std::vector<std::uint8_t> blob = std::move(requeued_messages_.front());
    requeued_messages_.pop_front();
    SegRec seg{snd_nxt_, static_cast<std::uint32_t>(blob.size()), false,
               std::make_shared<const std::vector<std::uint8_t>>(
                   std::move(blob))};
    return seg;
  }
  if (message_provider_) {
    auto blob = message_provider_();
    if (!blob) return std::nullopt;
    SegRec seg{snd_nxt_, static_cast<std::uint32_t>(blob->size()), false,
               std::make_shared<const std::vector<std::uint8_t>>(
                   std::move(*blob))};
    return seg;
  }
  std::uint64_t avail =
      unbounded_ ? std::numeric_limits<std::uint64_t>::max() : bytes_pending_;
  if (avail == 0) return std::nullopt;
  std::uint32_t len = static_cast<std::uint32_t>(
      std::min<std::uint64_t>(cfg_.mss, avail));
  if (!unbounded_) bytes_pending_ -= len;
  return SegRec{snd_nxt_, len, false, nullptr};
}

void TcpSender::maybe_send() {
  if (closed_ || sending_) return;
  sending_ = true;
  while (flight() < cwnd_) {
    auto seg = next_segment();
    if (!seg) break;
    bool is_retx = seg->seq < retx_high_;
    seg->retransmitted = is_retx;
    unacked_.push_back(*seg);
    snd_nxt_ += seg->len;
    snd_max_ = std::max(snd_max_, snd_nxt_);
    transmit(unacked_.back(), is_retx);
  }
  sending_ = false;
}

void TcpSender::transmit(SegRec& seg, bool retransmission) {
  net::Packet p;
  p.key = key_;
  p.seq = seg.seq;
  p.payload_size = seg.len;
  p.header_layers = seg.wire ? 2 : 1;
  p.ip_id = next_ip_id_++;
  p.created_at = engine_.now();
  p.wire = seg.wire;
  if (!retransmission && !rtt_probe_) {
    rtt_probe_ = {seg.seq + seg.len, engine_.now()};
  }
  if (!rto_timer_) arm_rto();
  net_.send(key_.src_node, std::move(p));
  if (!retransmission && on_first_transmit) on_first_transmit();
}

void TcpSender::on_ack(const net::Packet& ack) {
  if (closed_) return;
  std::uint64_t ack_seq = ack.ack_seq;
  if (ack_seq > snd_max_) {
    throw std::logic_error("TcpSender: ack beyond highest sequence sent");
  }
  if (ack_seq > snd_una_) {
    if (rtt_probe_ && ack_seq >= rtt_probe_->first) {
      rtt_update(engine_.now() - rtt_probe_->second);
      rtt_probe_.reset();
    }
    // A late ack can cover data sent before a go-back-N rewind; the covered
    // prefix of the rewound data must not be transmitted again.
    if (ack_seq > snd_nxt_) {
      std::uint64_t covered = ack_seq - snd_nxt_;
      snd_nxt_ = ack_seq;
      while (covered > 0 && !requeued_messages_.empty() &&
             requeued_messages_.front().size() <= covered) {
        covered -= requeued_messages_.front().size();
        requeued_messages_.pop_front();
      }
      if (covered > 0 && !requeued_messages_.empty()) {
        throw std::logic_error("TcpSender: ack splits a rewound segment");
      }
      if (!unbounded_) {
        bytes_pending_ -= std::min(bytes_pending_, covered);
      }
    }
    snd_una_ = ack_seq;
    while (!unacked_.empty() &&
           unacked_.front().seq + unacked_.front().len <= snd_una_) {
      unacked_.pop_front();
    }
    if (in_recovery_) {
      if (ack_seq >= recover_point_) {
        in_recovery_ = false;
        cwnd_ = ssthresh_;
      }
      dup_acks_ = 0;
    } else {
      dup_acks_ = 0;
      if (cwnd_ < ssthresh_) {
        cwnd_ += cfg_.mss;
      } else {
        std::uint64_t inc =
            static_cast<std::uint64_t>(cfg_.mss) * cfg_.mss / cwnd_;
        cwnd_ += std::max<std::uint64_t>(1, inc);
      }
    }
    disarm_rto();
    if (flight() > 0) arm_rto();
    check_acked_notify();
    maybe_send();
  } else if (ack_seq == snd_una_ && flight() > 0) {
    ++dup_acks_;
    if (in_recovery_) {
      cwnd_ += cfg_.mss;  // window inflation
      maybe_send();
    } else if (dup_acks_ == 3) {
      enter_fast_retransmit();
    }
  }
}

void TcpSender::enter_fast_retransmit() {
  std::uint64_t fl = flight();
  ssthresh_ = std::max<std::uint64_t>(fl / 2, 2ull * cfg_.mss);
  recover_point_ = snd_nxt_;
  in_recovery_ = true;
  ++fast_retransmits_;
  rtt_probe_.reset();
  if (!unacked_.empty()) {
    SegRec& front = unacked_.front();
    front.retransmitted = true;
    transmit(front, true);
  }
  cwnd_ = ssthresh_ + 3ull * cfg_.mss;
  disarm_rto();
  arm_rto();
  maybe_send();
}

void TcpSender::on_timeout() {
  if (flight() == 0) return;
  ++timeouts_;
  std::uint64_t fl = flight();
  ssthresh_ = std::max<std::uint64_t>(fl / 2, 2ull * cfg_.mss);
  cwnd_ = cfg_.mss;
  rto_ = std::min(rto_ * 2.0, cfg_.rto_max);
  retx_high_ = std::max(retx_high_, snd_nxt_);
  snd_nxt_ = snd_una_;
  // Hand unacked data back to the application layer for re-segmentation.
  for (auto it = unacked_.rbegin(); it != unacked_.rend(); ++it) {
    if (it->wire) {
      requeued_messages_.push_front(
          std::vector<std::uint8_t>(*it->wire));
    } else {
      if (!unbounded_) bytes_pending_ += it->len;
    }
  }
  // Byte-mode rewinds must restore bytes ahead of fresh data; with a FIFO
  // counter that ordering is implicit.
  unacked_.clear();
  dup_acks_ = 0;
  in_recovery_ = false;
  rtt_probe_.reset();
  maybe_send();
}

void TcpSender::force_window_halving() {
  cwnd_ = std::max<std::uint64_t>(cwnd_ / 2, cfg_.mss);
}

void TcpSender::arm_rto() {
  rto_timer_ = engine_.schedule_in(rto_, [this] {
    rto_timer_.reset();
    on_timeout();
  });
}

void TcpSender::disarm_rto() {
  if (rto_timer_) {
    engine_.cancel(*rto_timer_);
    rto_timer_.reset();
  }
}

void TcpSender::rtt_update(double sample) {
  if (sample < 0.0) {
    throw std::logic_error("TcpSender: negative rtt sample");
  }
  if (!have_rtt_) {
    srtt_ = sample;
    rttvar_ = sample / 2.0;
    have_rtt_ = true;
  } else {
    double err = sample - srtt_;
    srtt_ += err / 8.0;
    rttvar_ += (std::abs(err) - rttvar_) / 4.0;
  }
  rto_ = std::clamp(srtt_ + 4.0 * rttvar_, cfg_.rto_min, cfg_.rto_max);
}

void TcpSender::notify_when_acked(std::uint64_t target,
                                  std::function<void()> cb) {
  if (snd_una_ >= target) {
    cb();
    return;
  }
  ack_waiters_.emplace_back(target, std::move(cb));
}

void TcpSender::check_acked_notify() {
  for (std::size_t i = 0; i < ack_waiters_.size();) {
    if (snd_una_ >= ack_waiters_[i].first) {
      auto cb = std::move(ack_waiters_[i].second);
      ack_waiters_.erase(ack_waiters_.begin() + static_cast<long>(i));
      cb();
    } else {
      ++i;
    }
  }
}

TcpSink::TcpSink(sim::Engine& engine, net::Network& net, net::FlowKey data_key)
    : engine_(engine), net_(net), key_(data_key) {
  net_.node(key_.dst_node).bind(key_, [this](const net::Packet& p) {
    on_data(p);
  });
}

TcpSink::~TcpSink() { close(); }

void TcpSink::close() {
  if (closed_) return;
  closed_ = true;
  net_.node(key_.dst_node).unbind(key_);
}

void TcpSink::on_data(const net::Packet& pkt) {
  if (pkt.seq == rcv_nxt_) {
    rcv_nxt_ += pkt.payload_size;
    if (consumer_) consumer_(pkt.payload_size, pkt.wire.get());
    // Drain any now-contiguous out-of-order segments.
    while (!ooo_.empty()) {
      auto it = ooo_.begin();
      auto [seq, entry] = *it;
      auto [len, wire] = entry;
      if (seq > rcv_nxt_) break;
      ooo_.erase(it);
      if (seq + len <= rcv_nxt_) continue;  // stale duplicate
      if (seq != rcv_nxt_) continue;        // misaligned overlap, drop
      rcv_nxt_ += len;
      if (consumer_) consumer_(len, wire.get());
    }
  } else if (pkt.seq > rcv_nxt_) {
    ooo_[pkt.seq] = {pkt.payload_size, pkt.wire};
  }
  send_ack();
}

void TcpSink::send_ack() {
  net::Packet ack;
  ack.key = key_.reversed();
  ack.is_ack = true;
  ack.ack_seq = rcv_nxt_;
  ack.payload_size = 0;
  ack.header_layers = 1;
  ack.ip_id = next_ip_id_++;
  ack.created_at = engine_.now();
  net_.send(key_.dst_node, std::move(ack));
}

}  // namespace trunksim::tcp
