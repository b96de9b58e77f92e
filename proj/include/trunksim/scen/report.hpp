#ifndef TRUNKSIM_SCEN_REPORT_HPP
#define TRUNKSIM_SCEN_REPORT_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace trunksim::scen {

struct DelayStats {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by n)
  double max = 0.0;
  std::size_t count = 0;
};

// Mean, population standard deviation, and maximum of transfer delays.
DelayStats summarize_delays(const std::vector<double>& samples);

struct GroupStats {
  std::uint64_t delivered_bytes = 0;
  double throughput = 0.0;  // bytes/second over [warmup, duration]
};

struct QueueStats {
  std::uint64_t arrivals = 0;
  std::uint64_t drops = 0;
  std::uint64_t departures = 0;
  double drop_rate = 0.0;
};

struct TrunkStats {
  std::uint64_t arrivals = 0;
  std::uint64_t prob_drops = 0;
  std::uint64_t tail_drops = 0;
  std::uint64_t forwarded = 0;
  double drop_rate = 0.0;
  double cwnd_gt5_fraction = 0.0;  // share of samples with cwnd > 5 packets
  std::uint64_t p3_violations = 0;
};

struct MetricsReport {
  std::string scenario;
  std::uint64_t seed = 0;
  double duration = 0.0;
  double warmup = 0.0;
  std::map<std::string, GroupStats> groups;
  std::map<std::string, QueueStats> queues;
  std::map<std::string, TrunkStats> trunks;
  std::map<std::string, DelayStats> delays;
};

// CSV with a metric,entity,value,unit header; rows in deterministic order.
std::string to_csv(const MetricsReport& r);

// Aligned human-readable table.
std::string to_text(const MetricsReport& r);

// One row block per seed plus cross-seed mean/std rows per metric.
std::string sweep_to_csv(const std::vector<MetricsReport>& runs);

std::string format_value(double v);

}  // namespace trunksim::scen

#endif  // TRUNKSIM_SCEN_REPORT_HPP
