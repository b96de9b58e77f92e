#include "trunksim/trunk/codec.hpp"

#include <algorithm>
#include <bit>

namespace trunksim::trunk {

namespace {

std::uint16_t rd16(const net::HeaderImage& b, int at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::uint32_t rd32(const net::HeaderImage& b, int at) {
  return (static_cast<std::uint32_t>(b[at]) << 24) |
         (static_cast<std::uint32_t>(b[at + 1]) << 16) |
         (static_cast<std::uint32_t>(b[at + 2]) << 8) |
         static_cast<std::uint32_t>(b[at + 3]);
}

void wr16(net::HeaderImage& b, int at, std::uint16_t v) {
  b[at] = static_cast<std::uint8_t>(v >> 8);
  b[at + 1] = static_cast<std::uint8_t>(v);
}

void wr32(net::HeaderImage& b, int at, std::uint32_t v) {
  b[at] = static_cast<std::uint8_t>(v >> 24);
  b[at + 1] = static_cast<std::uint8_t>(v >> 16);
  b[at + 2] = static_cast<std::uint8_t>(v >> 8);
  b[at + 3] = static_cast<std::uint8_t>(v);
}

// Byte offsets of the four delta-coded fields.
constexpr int kOffIpId = 4;     // 2 bytes
constexpr int kOffSeq = 24;     // 4 bytes
constexpr int kOffAck = 28;     // 4 bytes
constexpr int kOffWindow = 34;  // 2 bytes

bool in_delta_field(int i) {
  return (i >= kOffIpId && i < kOffIpId + 2) ||
         (i >= kOffSeq && i < kOffSeq + 4) ||
         (i >= kOffAck && i < kOffAck + 4) ||
         (i >= kOffWindow && i < kOffWindow + 2);
}

// The predicted next header: previous image with seq advanced by the
// previous payload length.
net::HeaderImage predict(const CompressionContext& ctx) {
  net::HeaderImage p = ctx.last;
  std::uint16_t total_len = rd16(ctx.last, 2);
  std::uint32_t payload =
      total_len >= net::kHeaderBytes ? total_len - net::kHeaderBytes : 0;
  wr32(p, kOffSeq, rd32(ctx.last, kOffSeq) + payload);
  return p;
}

bool fits_i8(std::int64_t v) { return v >= -128 && v <= 127; }

}  // namespace

std::uint8_t HeaderCompressor::context_for(const net::FlowKey& flow) {
  if (auto it = ids_.find(flow); it != ids_.end()) {
    lru_.splice(lru_.end(), lru_, lru_pos_[flow]);
    return it->second;
  }
  std::uint8_t id;
  if (ids_.size() < 256) {
    id = static_cast<std::uint8_t>(ids_.size());
  } else {
    // Reuse the least-recently-used flow's context id; the next packet of
    // the new flow goes out as FULL form, resetting the receiver context.
    net::FlowKey victim = lru_.front();
    lru_.pop_front();
    lru_pos_.erase(victim);
    id = ids_[victim];
    ids_.erase(victim);
    contexts_[id] = CompressionContext{};
  }
  ids_[flow] = id;
  lru_.push_back(flow);
  lru_pos_[flow] = std::prev(lru_.end());
  return id;
}

std::vector<std::uint8_t> HeaderCompressor::compress(
    const net::FlowKey& flow, const net::HeaderImage& header) {
  std::uint8_t id = context_for(flow);
  CompressionContext& ctx = contexts_[id];

  std::vector<std::uint8_t> out;
  bool delta_ok = ctx.established;
  std::int64_t d_seq = 0, d_ack = 0, d_win = 0, d_ipid = 0;
  if (delta_ok) {
    net::HeaderImage pred = predict(ctx);
    for (int i = 0; i < static_cast<int>(net::kHeaderBytes); ++i) {
      if (header[i] != pred[i] && !in_delta_field(i)) {
        delta_ok = false;
        break;
      }
    }
    if (delta_ok) {
      d_seq = static_cast<std::int64_t>(
          static_cast<std::int32_t>(rd32(header, kOffSeq) -
                                    rd32(pred, kOffSeq)));
      d_ack = static_cast<std::int64_t>(
          static_cast<std::int32_t>(rd32(header, kOffAck) -
                                    rd32(pred, kOffAck)));
      d_win = static_cast<std::int64_t>(
          static_cast<std::int16_t>(rd16(header, kOffWindow) -
                                    rd16(pred, kOffWindow)));
      d_ipid = static_cast<std::int64_t>(
          static_cast<std::int16_t>(rd16(header, kOffIpId) -
                                    rd16(pred, kOffIpId)));
      delta_ok = fits_i8(d_seq) && fits_i8(d_ack) && fits_i8(d_win) &&
                 fits_i8(d_ipid);
      int changed = (d_seq != 0) + (d_ack != 0) + (d_win != 0) + (d_ipid != 0);
      if (changed > 3) delta_ok = false;  // keep DELTA forms <= 6 bytes
    }
  }

  if (delta_ok) {
    std::uint8_t mask = 0;
    if (d_seq != 0) mask |= kMaskSeq;
    if (d_ack != 0) mask |= kMaskAck;
    if (d_win != 0) mask |= kMaskWindow;
    if (d_ipid != 0) mask |= kMaskIpId;
    out.push_back(kTagDelta);
    out.push_back(id);
    out.push_back(mask);
    if (d_seq != 0) out.push_back(static_cast<std::uint8_t>(d_seq));
    if (d_ack != 0) out.push_back(static_cast<std::uint8_t>(d_ack));
    if (d_win != 0) out.push_back(static_cast<std::uint8_t>(d_win));
    if (d_ipid != 0) out.push_back(static_cast<std::uint8_t>(d_ipid));
  } else {
    out.push_back(kTagFull);
    out.push_back(id);
    out.insert(out.end(), header.begin(), header.end());
  }
  ctx.last = header;
  ctx.established = true;
  return out;
}

HeaderDecompressor::Result HeaderDecompressor::decompress(
    std::span<const std::uint8_t> in) {
  if (in.size() < 2) throw CodecError("decompress: truncated input");
  std::uint8_t tag = in[0];
  std::uint8_t id = in[1];
  CompressionContext& ctx = contexts_[id];
  if (tag == kTagFull) {
    if (in.size() < 2 + net::kHeaderBytes) {
      throw CodecError("decompress: truncated FULL form");
    }
    net::HeaderImage h;
    std::copy_n(in.begin() + 2, net::kHeaderBytes, h.begin());
    ctx.last = h;
    ctx.established = true;
    return {h, 2 + net::kHeaderBytes};
  }
  if (tag != kTagDelta) {
    throw CodecError("decompress: unknown type tag");
  }
  if (!ctx.established) {
    throw CodecError("decompress: DELTA form on unestablished context");
  }
  if (in.size() < 3) throw CodecError("decompress: truncated DELTA form");
  std::uint8_t mask = in[2];
  if (mask & ~(kMaskSeq | kMaskAck | kMaskWindow | kMaskIpId)) {
    throw CodecError("decompress: invalid change mask");
  }
  std::size_t need = 3;
  need += std::popcount(mask);
  if (in.size() < need) throw CodecError("decompress: truncated DELTA form");

  net::HeaderImage h = predict(ctx);
  std::size_t at = 3;
  auto take = [&]() { return static_cast<std::int8_t>(in[at++]); };
  if (mask & kMaskSeq) wr32(h, kOffSeq, rd32(h, kOffSeq) + take());
  if (mask & kMaskAck) wr32(h, kOffAck, rd32(h, kOffAck) + take());
  if (mask & kMaskWindow) {
    wr16(h, kOffWindow, static_cast<std::uint16_t>(rd16(h, kOffWindow) +
                                                   take()));
  }
  if (mask & kMaskIpId) {
    wr16(h, kOffIpId, static_cast<std::uint16_t>(rd16(h, kOffIpId) + take()));
  }
  ctx.last = h;
  return {h, need};
}

std::vector<std::uint8_t> frame(std::span<const std::uint8_t> payload) {
  if (payload.empty() || payload.size() > 0xFFFF) {
    throw CodecError("frame: payload length out of range");
  }
  std::vector<std::uint8_t> out;
  out.reserve(payload.size() + 2);
  out.push_back(static_cast<std::uint8_t>(payload.size() >> 8));
  out.push_back(static_cast<std::uint8_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::vector<std::vector<std::uint8_t>> Deframer::feed(
    std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  std::vector<std::vector<std::uint8_t>> frames;
  std::size_t at = 0;
  while (buffer_.size() - at >= 2) {
    std::size_t len = (static_cast<std::size_t>(buffer_[at]) << 8) |
                      buffer_[at + 1];
    if (buffer_.size() - at - 2 < len) break;
    frames.emplace_back(buffer_.begin() + at + 2,
                        buffer_.begin() + at + 2 + len);
    at += 2 + len;
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + at);
  return frames;
}

}  // namespace trunksim::trunk
