#include "trunksim/net/network.hpp"

#include <queue>

namespace trunksim::net {

Link::Link(sim::Engine& engine, Network& net, std::string name, NodeId to,
           double bandwidth_Bps, double propagation_s,
           std::size_t capacity_pkts)
    : engine_(engine),
      net_(net),
      name_(std::move(name)),
      to_(to),
      bandwidth_(bandwidth_Bps),
      propagation_(propagation_s),
      capacity_(capacity_pkts) {
  if (bandwidth_ <= 0.0) {
    throw std::invalid_argument("link " + name_ + ": bandwidth must be > 0");
  }
  if (capacity_ == 0) {
    throw std::invalid_argument("link " + name_ + ": capacity must be > 0");
  }
}

Link::EnqueueResult Link::enqueue(Packet pkt) {
  ++stats_.arrivals;
  if (queue_.size() >= capacity_) {
    ++stats_.drops;
    return EnqueueResult::kTailDropped;
  }
  queue_.push_back(std::move(pkt));
  if (!busy_) start_service();
  return EnqueueResult::kAccepted;
}

void Link::start_service() {
  busy_ = true;
  const Packet& head = queue_.front();
  double st = service_time(head);
  engine_.schedule_in(st, [this] {
    Packet pkt = std::move(queue_.front());
    queue_.pop_front();
    ++stats_.departures;
    stats_.bytes_departed += pkt.size_total();
    engine_.schedule_in(propagation_, [this, pkt = std::move(pkt)]() mutable {
      net_.deliver(to_, std::move(pkt));
    });
    if (!queue_.empty()) {
      start_service();
    } else {
      busy_ = false;
    }
  });
}

void Node::bind(const FlowKey& key, Handler h) {
  auto [it, inserted] = handlers_.emplace(key, std::move(h));
  if (!inserted) {
    throw std::logic_error("node " + name_ + ": duplicate flow binding");
  }
}

void Node::unbind(const FlowKey& key) { handlers_.erase(key); }

const Node::Handler* Node::handler(const FlowKey& key) const {
  auto it = handlers_.find(key);
  return it == handlers_.end() ? nullptr : &it->second;
}

NodeId Network::add_node(const std::string& name) {
  if (names_.count(name)) {
    throw std::invalid_argument("duplicate node name: " + name);
  }
  NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(std::make_unique<Node>(id, name));
  names_[name] = id;
  out_.emplace_back();
  routes_fresh_ = false;
  return id;
}

NodeId Network::node_id(const std::string& name) const {
  auto it = names_.find(name);
  if (it == names_.end()) {
    throw std::invalid_argument("unknown node name: " + name);
  }
  return it->second;
}

Link& Network::add_link(const std::string& name, NodeId from, NodeId to,
                        double bandwidth_Bps, double propagation_s,
                        std::size_t capacity_pkts) {
  links_.push_back(std::make_unique<Link>(engine_, *this, name, to,
                                          bandwidth_Bps, propagation_s,
                                          capacity_pkts));
  out_.at(from).push_back(links_.size() - 1);
  routes_fresh_ = false;
  return *links_.back();
}

void Network::build_routes() {
  const std::size_t n = nodes_.size();
  routes_.assign(n, std::vector<std::size_t>(n, kNoRoute));
  // BFS from each destination over reversed edges would need a reverse
  // adjacency; topologies here are tiny, so BFS from each source instead.
  for (std::size_t src = 0; src < n; ++src) {
    std::vector<std::size_t> first_link(n, kNoRoute);
    std::vector<bool> seen(n, false);
    std::queue<NodeId> frontier;
    seen[src] = true;
    frontier.push(static_cast<NodeId>(src));
    while (!frontier.empty()) {
      NodeId u = frontier.front();
      frontier.pop();
      for (std::size_t li : out_[u]) {
        NodeId v = links_[li]->to();
        if (seen[v]) continue;
        seen[v] = true;
        first_link[v] = (u == src) ? li : first_link[u];
        frontier.push(v);
      }
    }
    routes_[src] = std::move(first_link);
  }
  routes_fresh_ = true;
}

Link* Network::next_hop(NodeId from, NodeId dst) const {
  std::size_t li = routes_.at(from).at(dst);
  return li == kNoRoute ? nullptr : links_[li].get();
}

void Network::send(NodeId from, Packet pkt) {
  if (!routes_fresh_) {
    throw std::logic_error("Network::send before build_routes");
  }
  deliver(from, std::move(pkt));
}

void Network::deliver(NodeId at, Packet pkt) {
  Node& n = *nodes_.at(at);
  NodeId dst = pkt.key.dst_node;
  if (dst == at) {
    if (const Node::Handler* h = n.handler(pkt.key)) {
      (*h)(pkt);
    }
    // Packets for unbound flows (e.g. a transfer that already completed)
    // are silently discarded, as a host would RST them.
    return;
  }
  if (n.intercept() && n.intercept()(pkt)) return;
  Link* hop = next_hop(at, dst);
  if (hop == nullptr) {
    throw std::logic_error("no route from " + n.name() + " to node " +
                           std::to_string(dst));
  }
  hop->enqueue(std::move(pkt));
}

Link* Network::find_link(const std::string& name) const {
  for (const auto& l : links_) {
    if (l->name() == name) return l.get();
  }
  return nullptr;
}

}  // namespace trunksim::net
