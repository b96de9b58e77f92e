#include "trunksim/net/packet.hpp"

namespace trunksim::net {

namespace {

void put16(HeaderImage& b, int at, std::uint16_t v) {
  b[at] = static_cast<std::uint8_t>(v >> 8);
  b[at + 1] = static_cast<std::uint8_t>(v);
}

void put32(HeaderImage& b, int at, std::uint32_t v) {
  b[at] = static_cast<std::uint8_t>(v >> 24);
  b[at + 1] = static_cast<std::uint8_t>(v >> 16);
  b[at + 2] = static_cast<std::uint8_t>(v >> 8);
  b[at + 3] = static_cast<std::uint8_t>(v);
}

std::uint16_t get16(const HeaderImage& b, int at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::uint32_t get32(const HeaderImage& b, int at) {
  return (static_cast<std::uint32_t>(b[at]) << 24) |
         (static_cast<std::uint32_t>(b[at + 1]) << 16) |
         (static_cast<std::uint32_t>(b[at + 2]) << 8) |
         static_cast<std::uint32_t>(b[at + 3]);
}

}  // namespace

HeaderImage encode_header(const HeaderFields& f) {
  HeaderImage b{};
  // IPv4 header, 20 bytes. Node ids map into 10.0.0.0/8.
  b[0] = 0x45;
  b[1] = 0x00;
  put16(b, 2, f.total_len);
  put16(b, 4, f.ip_id);
  put16(b, 6, 0);  // no fragmentation
  b[8] = 64;       // ttl
  b[9] = static_cast<std::uint8_t>(f.key.proto);
  put16(b, 10, 0);  // checksum unused in simulation
  put32(b, 12, 0x0A000000u | f.key.src_node);
  put32(b, 16, 0x0A000000u | f.key.dst_node);
  // TCP header, 20 bytes.
  put16(b, 20, f.key.src_port);
  put16(b, 22, f.key.dst_port);
  put32(b, 24, f.seq);
  put32(b, 28, f.ack);
  b[32] = 0x50;  // data offset 5 words
  b[33] = f.flags;
  put16(b, 34, f.window);
  put16(b, 36, 0);  // checksum
  put16(b, 38, 0);  // urgent
  return b;
}

HeaderFields decode_header(const HeaderImage& b) {
  HeaderFields f;
  f.total_len = get16(b, 2);
  f.ip_id = get16(b, 4);
  f.key.proto = static_cast<Proto>(b[9]);
  f.key.src_node = static_cast<NodeId>(get32(b, 12) & 0xFFFF);
  f.key.dst_node = static_cast<NodeId>(get32(b, 16) & 0xFFFF);
  f.key.src_port = get16(b, 20);
  f.key.dst_port = get16(b, 22);
  f.seq = get32(b, 24);
  f.ack = get32(b, 28);
  f.flags = b[33];
  f.window = get16(b, 34);
  return f;
}

HeaderFields Packet::header_fields() const {
  HeaderFields f;
  f.key = key;
  f.seq = static_cast<std::uint32_t>(seq);
  f.ack = static_cast<std::uint32_t>(ack_seq);
  f.flags = is_ack ? 0x10 : 0x00;
  f.window = 0xFFFF;
  f.ip_id = ip_id;
  f.total_len = static_cast<std::uint16_t>(kHeaderBytes + payload_size);
  return f;
}

}  // namespace trunksim::net
