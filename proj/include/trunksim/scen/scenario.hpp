#ifndef TRUNKSIM_SCEN_SCENARIO_HPP
#define TRUNKSIM_SCEN_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "trunksim/scen/report.hpp"
#include "trunksim/trunk/trunk.hpp"

namespace trunksim::scen {

enum class SourceKind { kGreedyFtp, kWebSession };

struct LinkSpec {
  std::string name;
  std::string from;
  std::string to;
  double bandwidth_Bps = 0.0;
  double propagation_s = 0.0;
  std::size_t capacity_pkts = 0;

  bool operator==(const LinkSpec&) const = default;
};

struct SourceSpec {
  std::string group;        // metric aggregation key
  std::string node;         // where the senders live
  std::string dst;          // sink node
  SourceKind kind = SourceKind::kGreedyFtp;
  std::uint32_t count = 0;
  std::uint64_t transfer_bytes = 0;  // web sessions only

  bool operator==(const SourceSpec&) const = default;
};

struct TrunkSpec {
  std::string name;
  std::string from;  // transmitter node; intercepts TCP data sent toward `to`
  std::string to;    // receiver node
  trunk::TrunkConfig cfg;

  bool operator==(const TrunkSpec&) const = default;
};

struct ScenarioConfig {
  std::string name;
  double duration = 60.0;
  double warmup = 10.0;
  std::uint64_t seed = 1;
  std::vector<LinkSpec> links;
  std::vector<SourceSpec> sources;
  std::vector<TrunkSpec> trunks;

  bool operator==(const ScenarioConfig&) const = default;
};

// Throws std::invalid_argument naming the offending key.
void validate(const ScenarioConfig& cfg);

// Web-vs-ftp study: one bottleneck at 1,100,000 B/s with a 64-packet buffer.
//  a: 10 repeating 8 KB web sessions only.
//  b: plus two sites with 20 greedy ftp flows each, no trunks.
//  c: same load as b, one trunk per site (three total).
ScenarioConfig build_web_vs_ftp(char variant);

// Eight-site study: 1,250,000 B/s bottleneck with a 130-packet buffer,
// 250 greedy ftp flows plus 30 web sessions at site C, one 8 KB probe
// session per site; trunking=true adds one trunk per site.
ScenarioConfig build_eight_sites(bool trunking);

// Fairness micro-study: four equal-RTT trunks, eight greedy flows each,
// sharing one FIFO bottleneck.
ScenarioConfig build_fair_trunks();

MetricsReport run_scenario(const ScenarioConfig& cfg, std::uint64_t seed);

}  // namespace trunksim::scen

#endif  // TRUNKSIM_SCEN_SCENARIO_HPP
