#include "trunksim/scen/scenario.hpp"

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "trunksim/net/network.hpp"
#include "trunksim/net/packet.hpp"
#include "trunksim/sim/engine.hpp"
#include "trunksim/tcp/reno.hpp"

namespace trunksim::scen {

void validate(const ScenarioConfig& cfg) {
  if (cfg.warmup < 0.0) {
    throw std::invalid_argument("warmup: must be >= 0");
  }
  if (cfg.duration <= cfg.warmup) {
    throw std::invalid_argument("duration: must exceed warmup");
  }
  if (cfg.links.empty()) {
    throw std::invalid_argument("links: at least one link required");
  }
  std::set<std::string> nodes;
  std::set<std::string> link_names;
  for (const LinkSpec& l : cfg.links) {
    if (l.name.empty()) {
      throw std::invalid_argument("link: name must be non-empty");
    }
    if (!link_names.insert(l.name).second) {
      throw std::invalid_argument("link " + l.name + ": duplicate name");
    }
    if (l.from.empty() || l.to.empty() || l.from == l.to) {
      throw std::invalid_argument("link " + l.name +
                                  ": endpoints must be distinct and named");
    }
    if (l.bandwidth_Bps <= 0.0) {
      throw std::invalid_argument("link " + l.name +
                                  ": bandwidth must be > 0");
    }
    if (l.propagation_s < 0.0) {
      throw std::invalid_argument("link " + l.name +
                                  ": propagation must be >= 0");
    }
    if (l.capacity_pkts == 0) {
      throw std::invalid_argument("link " + l.name + ": capacity must be > 0");
    }
    nodes.insert(l.from);
    nodes.insert(l.to);
  }
  if (cfg.sources.empty()) {
    throw std::invalid_argument("sources: at least one source required");
  }
  for (const SourceSpec& s : cfg.sources) {
    if (s.group.empty()) {
      throw std::invalid_argument("source: group must be non-empty");
    }
    if (!nodes.count(s.node)) {
      throw std::invalid_argument("source " + s.group + ": unknown node " +
                                  s.node);
    }
    if (!nodes.count(s.dst)) {
      throw std::invalid_argument("source " + s.group + ": unknown node " +
                                  s.dst);
    }
    if (s.count == 0) {
      throw std::invalid_argument("source " + s.group + ": count must be > 0");
    }
    if (s.kind == SourceKind::kWebSession && s.transfer_bytes == 0) {
      throw std::invalid_argument("source " + s.group +
                                  ": transfer_bytes must be > 0");
    }
  }
  std::set<std::string> trunk_names;
  std::set<std::string> trunk_tx_nodes;
  for (const TrunkSpec& t : cfg.trunks) {
    if (t.name.empty()) {
      throw std::invalid_argument("trunk: name must be non-empty");
    }
    if (!trunk_names.insert(t.name).second) {
      throw std::invalid_argument("trunk " + t.name + ": duplicate name");
    }
    if (!nodes.count(t.from)) {
      throw std::invalid_argument("trunk " + t.name + ": unknown node " +
                                  t.from);
    }
    if (!nodes.count(t.to)) {
      throw std::invalid_argument("trunk " + t.name + ": unknown node " +
                                  t.to);
    }
    if (t.from == t.to) {
      throw std::invalid_argument("trunk " + t.name +
                                  ": endpoints must be distinct");
    }
    if (!trunk_tx_nodes.insert(t.from).second) {
      throw std::invalid_argument("trunk " + t.name +
                                  ": second trunk at node " + t.from);
    }
    try {
      trunk::validate(t.cfg);
    } catch (const std::exception& e) {
      throw std::invalid_argument("trunk " + t.name + ": " + e.what());
    }
  }
}

namespace {

constexpr double kAccessProp = 0.005;
constexpr double kBottleneckProp = 0.005;

void add_duplex(ScenarioConfig& cfg, const std::string& a,
                const std::string& b, double bw, double prop,
                std::size_t fwd_cap, std::size_t rev_cap) {
  cfg.links.push_back({a + "-" + b, a, b, bw, prop, fwd_cap});
  cfg.links.push_back({b + "-" + a, b, a, bw, prop, rev_cap});
}

}  // namespace

ScenarioConfig build_web_vs_ftp(char variant) {
  if (variant != 'a' && variant != 'b' && variant != 'c') {
    throw std::invalid_argument("build_web_vs_ftp: variant must be a, b or c");
  }
  ScenarioConfig cfg;
  cfg.name = std::string("fig2:") + variant;
  const double bottleneck_bw = 1.1e6;
  const double access_bw = 2.2e6;
  std::vector<std::string> sites = {"web"};
  if (variant != 'a') {
    sites.push_back("ftp1");
    sites.push_back("ftp2");
  }
  for (const std::string& s : sites) {
    add_duplex(cfg, s, "R", access_bw, kAccessProp, 100, 2000);
  }
  cfg.links.push_back({"R-D", "R", "D", bottleneck_bw, kBottleneckProp, 64});
  cfg.links.push_back({"D-R", "D", "R", bottleneck_bw, kBottleneckProp, 2000});
  cfg.sources.push_back(
      {"web", "web", "D", SourceKind::kWebSession, 10, 8192});
  if (variant != 'a') {
    cfg.sources.push_back({"ftp1", "ftp1", "D", SourceKind::kGreedyFtp, 20, 0});
    cfg.sources.push_back({"ftp2", "ftp2", "D", SourceKind::kGreedyFtp, 20, 0});
  }
  if (variant == 'c') {
    for (const std::string& s : sites) {
      trunk::TrunkConfig tc;
      tc.rtt_up = 0.1;
      tc.trunk_bw = bottleneck_bw / static_cast<double>(sites.size());
      cfg.trunks.push_back({"trunk-" + s, s, "D", tc});
    }
  }
  return cfg;
}

ScenarioConfig build_eight_sites(bool trunking) {
  ScenarioConfig cfg;
  cfg.name = trunking ? "fig3:on" : "fig3:off";
  const double bottleneck_bw = 1.25e6;
  const double access_bw = 2.5e6;
  const char letters[] = {'A', 'B', 'C', 'D', 'E', 'F', 'G', 'H'};
  for (char c : letters) {
    add_duplex(cfg, std::string("site") + c, "R", access_bw, kAccessProp, 200,
               2000);
  }
  // A longer haul than the access hops: the trunk windows need room to
  // breathe or the shared FIFO stays the loss point even with trunks on.
  const double bottleneck_prop = 0.045;
  cfg.links.push_back({"R-D", "R", "D", bottleneck_bw, bottleneck_prop, 130});
  cfg.links.push_back({"D-R", "D", "R", bottleneck_bw, bottleneck_prop, 4000});
  // 280 greedy flows total: A=30, B=3, the five unnamed sites split the
  // remaining 247; C runs 30 short-transfer sessions instead.
  cfg.sources.push_back({"siteA", "siteA", "D", SourceKind::kGreedyFtp, 30, 0});
  cfg.sources.push_back({"siteB", "siteB", "D", SourceKind::kGreedyFtp, 3, 0});
  cfg.sources.push_back(
      {"siteC", "siteC", "D", SourceKind::kWebSession, 30, 8192});
  const std::uint32_t rest[] = {44, 44, 43, 43, 43};
  for (std::size_t i = 0; i < 5; ++i) {
    std::string site = std::string("site") + letters[3 + i];
    cfg.sources.push_back({site, site, "D", SourceKind::kGreedyFtp, rest[i],
                           0});
  }
  for (char c : letters) {
    cfg.sources.push_back({std::string("probe") + c, std::string("site") + c,
                           "D", SourceKind::kWebSession, 1, 8192});
  }
  if (trunking) {
    for (char c : letters) {
      trunk::TrunkConfig tc;
      // rtt_up is the operator's upper estimate of that site's user-flow
      // RTTs. Overloaded sites see multi-second RTTs (queueing plus coarse
      // retransmission timers); site B's three healthy flows do not.
      tc.rtt_up = c == 'B' ? 0.2 : 1.0;
      tc.trunk_bw = bottleneck_bw / 8.0;
      cfg.trunks.push_back({std::string("trunk") + c, std::string("site") + c,
                            "D", tc});
    }
  }
  return cfg;
}

ScenarioConfig build_fair_trunks() {
  ScenarioConfig cfg;
  cfg.name = "fair4";
  cfg.duration = 120.0;
  const double bottleneck_bw = 1.25e6;
  const double access_bw = 2.5e6;
  for (int i = 1; i <= 4; ++i) {
    std::string s = "s" + std::to_string(i);
    add_duplex(cfg, s, "R", access_bw, 0.01, 200, 2000);
    cfg.sources.push_back({s, s, "D", SourceKind::kGreedyFtp, 8, 0});
    trunk::TrunkConfig tc;
    tc.rtt_up = 0.1;
    tc.trunk_bw = bottleneck_bw / 4.0;
    cfg.trunks.push_back({"trunk-" + s, s, "D", tc});
  }
  cfg.links.push_back({"R-D", "R", "D", bottleneck_bw, 0.01, 128});
  cfg.links.push_back({"D-R", "D", "R", bottleneck_bw, 0.01, 2000});
  return cfg;
}

namespace {

// User stacks run the coarse retransmission timers of their era: a crushed
// flow backs off for half a second instead of hammering a saturated trunk.
tcp::RenoConfig user_tcp_config() {
  tcp::RenoConfig cfg;
  cfg.rto_min = 1.0;
  return cfg;
}

// One closed-loop short-transfer session: fresh connection per transfer,
// next request issued the moment the previous page completes.
class WebSession {
 public:
  WebSession(sim::Engine& engine, net::Network& net, net::NodeId src,
             net::NodeId dst, std::uint16_t base_port, std::uint64_t page,
             double warmup, std::uint64_t* bytes_out,
             std::vector<double>* delays)
      : engine_(engine),
        net_(net),
        src_(src),
        dst_(dst),
        base_port_(base_port),
        page_(page),
        warmup_(warmup),
        bytes_out_(bytes_out),
        delays_(delays) {}

  void start(double at) {
    engine_.schedule(at, [this] { begin_transfer(); });
  }

 private:
  void begin_transfer() {
    // Ports cycle with a long period so stray segments from a finished
    // transfer can never land on a live connection.
    std::uint16_t sport =
        static_cast<std::uint16_t>(base_port_ + transfer_idx_ % 997);
    ++transfer_idx_;
    net::FlowKey key{src_, dst_, sport, 81, net::Proto::kTcp};
    sink_ = std::make_unique<tcp::TcpSink>(engine_, net_, key);
    sender_ = std::make_unique<tcp::TcpSender>(engine_, net_, key,
                                               user_tcp_config());
    started_at_ = engine_.now();
    completed_ = false;
    sink_->set_consumer(
        [this](std::uint64_t n, const std::vector<std::uint8_t>*) {
          if (engine_.now() >= warmup_) *bytes_out_ += n;
          if (!completed_ && sink_->delivered_bytes() >= page_) {
            completed_ = true;
            // The sink cannot be destroyed from inside its own consumer.
            engine_.schedule_in(0.0, [this] { finish_transfer(); });
          }
        });
    sender_->enqueue_bytes(page_);
  }

  void finish_transfer() {
    if (engine_.now() >= warmup_) {
      delays_->push_back(engine_.now() - started_at_);
    }
    sender_.reset();
    sink_.reset();
    begin_transfer();
  }

  sim::Engine& engine_;
  net::Network& net_;
  net::NodeId src_;
  net::NodeId dst_;
  std::uint16_t base_port_;
  std::uint64_t page_;
  double warmup_;
  std::uint64_t* bytes_out_;
  std::vector<double>* delays_;

  std::unique_ptr<tcp::TcpSink> sink_;
  std::unique_ptr<tcp::TcpSender> sender_;
  std::uint32_t transfer_idx_ = 0;
  double started_at_ = 0.0;
  bool completed_ = false;
};

struct GreedyFlow {
  std::unique_ptr<tcp::TcpSink> sink;
  std::unique_ptr<tcp::TcpSender> sender;
};

class Runner {
 public:
  Runner(const ScenarioConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), seed_(seed), net_(engine_) {}

  MetricsReport run() {
    build();
    engine_.run(cfg_.duration);
    check_conservation();
    return assemble();
  }

 private:
  void build() {
    for (const LinkSpec& l : cfg_.links) {
      add_node_once(l.from);
      add_node_once(l.to);
    }
    for (const LinkSpec& l : cfg_.links) {
      net_.add_link(l.name, net_.node_id(l.from), net_.node_id(l.to),
                    l.bandwidth_Bps, l.propagation_s, l.capacity_pkts);
    }
    net_.build_routes();
    build_trunks();
    build_sources();
    engine_.schedule(cfg_.warmup, [this] { snapshot_baselines(); });
    if (!transmitters_.empty()) {
      cwnd_over5_.assign(transmitters_.size(), 0);
      engine_.schedule(cfg_.warmup, [this] { sample_cwnd(); });
    }
  }

  void add_node_once(const std::string& name) {
    if (!node_seen_.insert(name).second) return;
    net_.add_node(name);
  }

  void build_trunks() {
    for (std::size_t i = 0; i < cfg_.trunks.size(); ++i) {
      const TrunkSpec& spec = cfg_.trunks[i];
      net::NodeId tx_node = net_.node_id(spec.from);
      net::NodeId rx_node = net_.node_id(spec.to);
      net::FlowKey key{tx_node, rx_node,
                       static_cast<std::uint16_t>(9000 + i),
                       static_cast<std::uint16_t>(9000 + i), net::Proto::kTcp};
      receivers_.push_back(
          std::make_unique<trunk::TrunkReceiver>(engine_, net_, key));
      transmitters_.push_back(std::make_unique<trunk::TrunkTransmitter>(
          engine_, net_, spec.name, key, spec.cfg, seed_, *receivers_.back()));
      trunk::TrunkTransmitter* tx = transmitters_.back().get();
      net_.node(tx_node).set_intercept(
          [this, tx, rx_node](net::Packet& p) -> bool {
            if (p.header_layers != 1 || p.is_ack) return false;
            if (p.key.dst_node != rx_node) return false;
            if (trunk::classify(p) != trunk::TrunkClass::kTcpTrunk) {
              return false;
            }
            tx->admit(std::move(p), engine_.now());
            return true;
          });
    }
  }

  void build_sources() {
    std::uint16_t greedy_port = 1000;
    std::uint16_t web_base = 20000;
    for (const SourceSpec& spec : cfg_.sources) {
      std::uint64_t* bytes_out = &delivered_[spec.group];
      net::NodeId src = net_.node_id(spec.node);
      net::NodeId dst = net_.node_id(spec.dst);
      for (std::uint32_t i = 0; i < spec.count; ++i) {
        sim::RandomStream jitter(
            seed_, "src:" + spec.group + "#" + std::to_string(i));
        double start_at = jitter.next_uniform();
        if (spec.kind == SourceKind::kGreedyFtp) {
          net::FlowKey key{src, dst, greedy_port++, 80, net::Proto::kTcp};
          auto flow = std::make_unique<GreedyFlow>();
          flow->sink = std::make_unique<tcp::TcpSink>(engine_, net_, key);
          flow->sink->set_consumer(
              [this, bytes_out](std::uint64_t n,
                                const std::vector<std::uint8_t>*) {
                if (engine_.now() >= cfg_.warmup) *bytes_out += n;
              });
          flow->sender = std::make_unique<tcp::TcpSender>(engine_, net_, key,
                                                          user_tcp_config());
          tcp::TcpSender* sender = flow->sender.get();
          greedy_.push_back(std::move(flow));
          engine_.schedule(start_at, [sender] {
            sender->set_unbounded();
            sender->maybe_send();
          });
        } else {
          std::vector<double>* delays = &delay_samples_[spec.group];
          sessions_.push_back(std::make_unique<WebSession>(
              engine_, net_, src, dst, web_base, spec.transfer_bytes,
              cfg_.warmup, bytes_out, delays));
          web_base = static_cast<std::uint16_t>(web_base + 1000);
          sessions_.back()->start(start_at);
        }
      }
    }
  }

  void snapshot_baselines() {
    for (const auto& l : net_.links()) {
      link_baseline_[l->name()] = l->stats();
    }
    for (const auto& t : transmitters_) {
      trunk_baseline_[t->name()] = t->counters();
    }
  }

  void sample_cwnd() {
    if (engine_.now() >= cfg_.duration) return;
    ++cwnd_samples_;
    for (std::size_t i = 0; i < transmitters_.size(); ++i) {
      const tcp::TcpSender& conn = transmitters_[i]->conn();
      if (conn.cwnd() > 5ull * conn.mss()) ++cwnd_over5_[i];
    }
    engine_.schedule_in(0.01, [this] { sample_cwnd(); });
  }

  void check_conservation() {
    for (const auto& l : net_.links()) {
      if (!l->conserved()) {
        throw std::logic_error("conservation violated at link " + l->name());
      }
    }
    for (const auto& t : transmitters_) {
      if (!t->conserved()) {
        throw std::logic_error("conservation violated at trunk " + t->name());
      }
    }
  }

  MetricsReport assemble() {
    MetricsReport r;
    r.scenario = cfg_.name;
    r.seed = seed_;
    r.duration = cfg_.duration;
    r.warmup = cfg_.warmup;
    const double window = cfg_.duration - cfg_.warmup;
    for (const auto& [group, bytes] : delivered_) {
      r.groups[group] = {bytes, static_cast<double>(bytes) / window};
    }
    for (const auto& l : net_.links()) {
      const net::LinkStats& end = l->stats();
      net::LinkStats base;  // zero if the warmup snapshot never fired
      auto it = link_baseline_.find(l->name());
      if (it != link_baseline_.end()) base = it->second;
      QueueStats q;
      q.arrivals = end.arrivals - base.arrivals;
      q.drops = end.drops - base.drops;
      q.departures = end.departures - base.departures;
      q.drop_rate = q.arrivals == 0
                        ? 0.0
                        : static_cast<double>(q.drops) / q.arrivals;
      r.queues[l->name()] = q;
    }
    for (std::size_t i = 0; i < transmitters_.size(); ++i) {
      const trunk::TrunkTransmitter& t = *transmitters_[i];
      trunk::TrunkCounters base;
      auto it = trunk_baseline_.find(t.name());
      if (it != trunk_baseline_.end()) base = it->second;
      TrunkStats s;
      s.arrivals = t.counters().arrivals - base.arrivals;
      s.prob_drops = t.counters().prob_drops - base.prob_drops;
      s.tail_drops = t.counters().tail_drops - base.tail_drops;
      s.forwarded = t.counters().forwarded - base.forwarded;
      s.drop_rate =
          s.arrivals == 0
              ? 0.0
              : static_cast<double>(s.prob_drops + s.tail_drops) / s.arrivals;
      s.cwnd_gt5_fraction =
          cwnd_samples_ == 0 ? 0.0
                             : static_cast<double>(cwnd_over5_[i]) /
                                   static_cast<double>(cwnd_samples_);
      s.p3_violations = t.p3_violations();
      r.trunks[t.name()] = s;
    }
    for (const auto& [group, samples] : delay_samples_) {
      if (!samples.empty()) r.delays[group] = summarize_delays(samples);
    }
    return r;
  }

  const ScenarioConfig& cfg_;
  std::uint64_t seed_;
  sim::Engine engine_;
  net::Network net_;
  std::set<std::string> node_seen_;

  std::vector<std::unique_ptr<trunk::TrunkReceiver>> receivers_;
  std::vector<std::unique_ptr<trunk::TrunkTransmitter>> transmitters_;
  std::vector<std::unique_ptr<GreedyFlow>> greedy_;
  std::vector<std::unique_ptr<WebSession>> sessions_;

  std::map<std::string, std::uint64_t> delivered_;
  std::map<std::string, std::vector<double>> delay_samples_;
  std::map<std::string, net::LinkStats> link_baseline_;
  std::map<std::string, trunk::TrunkCounters> trunk_baseline_;
  std::vector<std::uint64_t> cwnd_over5_;
  std::uint64_t cwnd_samples_ = 0;
};

}  // namespace

MetricsReport run_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  Runner runner(cfg, seed);
  return runner.run();
}

}  // namespace trunksim::scen
