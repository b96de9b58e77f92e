#ifndef TRUNKSIM_NET_PACKET_HPP
#define TRUNKSIM_NET_PACKET_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <vector>

namespace trunksim::net {

inline constexpr std::uint32_t kHeaderBytes = 40;  // one IP + TCP header pair

enum class Proto : std::uint8_t { kTcp = 6, kUdp = 17 };

using NodeId = std::uint16_t;

struct FlowKey {
  NodeId src_node = 0;
  NodeId dst_node = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  Proto proto = Proto::kTcp;

  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;

  FlowKey reversed() const {
    return FlowKey{dst_node, src_node, dst_port, src_port, proto};
  }
};

// The 40-byte IP+TCP header image carried (and compressed) on the wire.
using HeaderImage = std::array<std::uint8_t, kHeaderBytes>;

struct HeaderFields {
  FlowKey key;
  std::uint32_t seq = 0;
  std::uint32_t ack = 0;
  std::uint8_t flags = 0;  // 0x10 = ACK bit
  std::uint16_t window = 0;
  std::uint16_t ip_id = 0;
  std::uint16_t total_len = kHeaderBytes;  // header + payload

  friend bool operator==(const HeaderFields&, const HeaderFields&) = default;
};

HeaderImage encode_header(const HeaderFields& f);
HeaderFields decode_header(const HeaderImage& img);

struct Packet {
  FlowKey key;
  std::uint64_t seq = 0;        // byte offset within the flow
  std::uint32_t payload_size = 0;
  bool is_ack = false;
  std::uint64_t ack_seq = 0;
  int header_layers = 1;        // 1 bare, 2 trunk-encapsulated
  std::uint16_t ip_id = 0;
  double created_at = 0.0;
  // Trunk segments carry their framed payload bytes; user packets do not.
  std::shared_ptr<const std::vector<std::uint8_t>> wire;

  // Payload plus the outermost 40-byte header pair. For a trunk segment the
  // compressed inner header pair is already part of payload_size.
  std::uint32_t size_total() const { return payload_size + kHeaderBytes; }

  HeaderFields header_fields() const;
};

}  // namespace trunksim::net

#endif  // TRUNKSIM_NET_PACKET_HPP
