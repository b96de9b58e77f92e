#ifndef TRUNKSIM_TRUNK_CODEC_HPP
#define TRUNKSIM_TRUNK_CODEC_HPP

#include <array>
#include <cstdint>
#include <deque>
#include <list>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "trunksim/net/packet.hpp"

namespace trunksim::trunk {

// Raised on malformed compressed-header or frame input. The trunk TCP layer
// delivers bytes reliably in order, so hitting this signals a bug, not loss.
struct CodecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint8_t kTagFull = 0x00;
inline constexpr std::uint8_t kTagDelta = 0x01;

// Delta-field mask bits, residuals emitted in this order.
inline constexpr std::uint8_t kMaskSeq = 0x01;
inline constexpr std::uint8_t kMaskAck = 0x02;
inline constexpr std::uint8_t kMaskWindow = 0x04;
inline constexpr std::uint8_t kMaskIpId = 0x08;

// Per-context compression state shared by both directions of the codec:
// the last transmitted full header image plus an established flag.
struct CompressionContext {
  net::HeaderImage last{};
  bool established = false;
};

// Compresses 40-byte IP/TCP header images against per-flow contexts.
//
// FULL form:  0x00, context_id, 40 header bytes            (42 bytes)
// DELTA form: 0x01, context_id, change mask, residuals      (3..6 bytes)
//
// The sequence number is predicted as last_seq + last_payload_len and the
// residual against that prediction is what gets encoded, so a steady
// unidirectional flow of constant-size segments compresses to 4 bytes
// (its only unpredicted change is ip_id advancing by one). Any residual
// outside [-128,127], a change outside the four delta fields, or more than
// three changed fields escapes to FULL form.
class HeaderCompressor {
 public:
  std::vector<std::uint8_t> compress(const net::FlowKey& flow,
                                     const net::HeaderImage& header);

  std::size_t context_count() const { return ids_.size(); }

 private:
  std::uint8_t context_for(const net::FlowKey& flow);

  std::array<CompressionContext, 256> contexts_{};
  std::map<net::FlowKey, std::uint8_t> ids_;
  // Least-recently-used flow order for context-id reuse past 256 flows.
  std::list<net::FlowKey> lru_;
  std::map<net::FlowKey, std::list<net::FlowKey>::iterator> lru_pos_;
};

class HeaderDecompressor {
 public:
  struct Result {
    net::HeaderImage header;
    std::size_t consumed;
  };

  // Consumes exactly one compressed header from the front of `in`.
  Result decompress(std::span<const std::uint8_t> in);

 private:
  std::array<CompressionContext, 256> contexts_{};
};

// 2-byte big-endian length prefix delimiting compressed packets in the
// trunk byte stream.
std::vector<std::uint8_t> frame(std::span<const std::uint8_t> payload);

// Incremental frame extractor; tolerates arbitrary split points.
class Deframer {
 public:
  std::vector<std::vector<std::uint8_t>> feed(
      std::span<const std::uint8_t> bytes);

  std::size_t residual_size() const { return buffer_.size(); }

 private:
  std::vector<std::uint8_t> buffer_;
};

}  // namespace trunksim::trunk

#endif  // TRUNKSIM_TRUNK_CODEC_HPP
