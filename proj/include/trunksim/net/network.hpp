#ifndef TRUNKSIM_NET_NETWORK_HPP
#define TRUNKSIM_NET_NETWORK_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "trunksim/net/packet.hpp"
#include "trunksim/sim/engine.hpp"

namespace trunksim::net {

class Network;

struct LinkStats {
  std::uint64_t arrivals = 0;
  std::uint64_t drops = 0;
  std::uint64_t departures = 0;
  std::uint64_t bytes_departed = 0;

  double drop_rate() const {
    return arrivals == 0 ? 0.0 : static_cast<double>(drops) / arrivals;
  }
};

// Unidirectional store-and-forward link with a drop-tail FIFO queue counted
// in packets. The packet under serialization occupies a queue slot.
class Link {
 public:
  Link(sim::Engine& engine, Network& net, std::string name, NodeId to,
       double bandwidth_Bps, double propagation_s, std::size_t capacity_pkts);

  enum class EnqueueResult { kAccepted, kTailDropped };

  EnqueueResult enqueue(Packet pkt);

  double service_time(const Packet& pkt) const {
    return static_cast<double>(pkt.size_total()) / bandwidth_;
  }

  const LinkStats& stats() const { return stats_; }
  NodeId to() const { return to_; }
  const std::string& name() const { return name_; }
  std::size_t queue_len() const { return queue_.size(); }
  std::size_t capacity() const { return capacity_; }
  double bandwidth() const { return bandwidth_; }

  // arrivals = departures + drops + resident
  bool conserved() const {
    return stats_.arrivals == stats_.departures + stats_.drops + queue_.size();
  }

 private:
  void start_service();

  sim::Engine& engine_;
  Network& net_;
  std::string name_;
  NodeId to_;
  double bandwidth_;
  double propagation_;
  std::size_t capacity_;
  std::deque<Packet> queue_;
  bool busy_ = false;
  LinkStats stats_;
};

class Node {
 public:
  using Handler = std::function<void(const Packet&)>;
  // Returns true when the packet was consumed (e.g. admitted to a trunk).
  using Intercept = std::function<bool(Packet&)>;

  explicit Node(NodeId id, std::string name)
      : id_(id), name_(std::move(name)) {}

  NodeId id() const { return id_; }
  const std::string& name() const { return name_; }

  void bind(const FlowKey& key, Handler h);
  void unbind(const FlowKey& key);
  const Handler* handler(const FlowKey& key) const;

  void set_intercept(Intercept i) { intercept_ = std::move(i); }
  const Intercept& intercept() const { return intercept_; }

 private:
  NodeId id_;
  std::string name_;
  std::map<FlowKey, Handler> handlers_;
  Intercept intercept_;
};

// Static-routed topology. Routes are next-hop links computed by BFS over the
// directed link graph, rebuilt on demand after topology edits.
class Network {
 public:
  explicit Network(sim::Engine& engine) : engine_(engine) {}

  NodeId add_node(const std::string& name);
  NodeId node_id(const std::string& name) const;
  Node& node(NodeId id) { return *nodes_.at(id); }
  const Node& node(NodeId id) const { return *nodes_.at(id); }
  std::size_t node_count() const { return nodes_.size(); }

  Link& add_link(const std::string& name, NodeId from, NodeId to,
                 double bandwidth_Bps, double propagation_s,
                 std::size_t capacity_pkts);

  void build_routes();

  // Injects a packet at `from`: local delivery, trunk interception, or
  // next-hop forwarding. Unreachable destinations throw at build_routes time,
  // never here.
  void send(NodeId from, Packet pkt);

  // Called by links when a packet reaches the far end of the wire.
  void deliver(NodeId at, Packet pkt);

  Link* next_hop(NodeId from, NodeId dst) const;

  const std::vector<std::unique_ptr<Link>>& links() const { return links_; }
  Link* find_link(const std::string& name) const;

 private:
  sim::Engine& engine_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::map<std::string, NodeId> names_;
  std::vector<std::unique_ptr<Link>> links_;
  // adjacency: node -> outgoing link indices
  std::vector<std::vector<std::size_t>> out_;
  // routes_[from][dst] = link index or npos
  std::vector<std::vector<std::size_t>> routes_;
  bool routes_fresh_ = false;

  static constexpr std::size_t kNoRoute = static_cast<std::size_t>(-1);
};

}  // namespace trunksim::net

#endif  // TRUNKSIM_NET_NETWORK_HPP
