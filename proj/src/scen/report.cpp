#include "trunksim/scen/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace trunksim::scen {

DelayStats summarize_delays(const std::vector<double>& samples) {
  if (samples.empty()) {
    throw std::invalid_argument("summarize_delays: empty sample list");
  }
  DelayStats s;
  s.count = samples.size();
  double sum = 0.0;
  for (double v : samples) {
    sum += v;
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(samples.size());
  double var = 0.0;
  for (double v : samples) {
    var += (v - s.mean) * (v - s.mean);
  }
  s.stddev = std::sqrt(var / static_cast<double>(samples.size()));
  return s;
}

std::string format_value(double v) {
  // Shortest representation that round-trips; '.' decimal, no locale.
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) {
    throw std::logic_error("format_value: to_chars failed");
  }
  return std::string(buf, end);
}

namespace {

struct Row {
  std::string metric;
  std::string entity;
  double value;
  std::string unit;
};

std::vector<Row> rows_of(const MetricsReport& r) {
  std::vector<Row> rows;
  for (const auto& [g, s] : r.groups) {
    rows.push_back({"throughput", g, s.throughput, "B/s"});
  }
  for (const auto& [g, s] : r.groups) {
    rows.push_back({"delivered_bytes", g, static_cast<double>(s.delivered_bytes),
                    "B"});
  }
  for (const auto& [q, s] : r.queues) {
    rows.push_back({"queue_arrivals", q, static_cast<double>(s.arrivals),
                    "pkt"});
  }
  for (const auto& [q, s] : r.queues) {
    rows.push_back({"queue_drops", q, static_cast<double>(s.drops), "pkt"});
  }
  for (const auto& [q, s] : r.queues) {
    rows.push_back({"drop_rate", q, s.drop_rate, "ratio"});
  }
  for (const auto& [t, s] : r.trunks) {
    rows.push_back({"trunk_arrivals", t, static_cast<double>(s.arrivals),
                    "pkt"});
  }
  for (const auto& [t, s] : r.trunks) {
    rows.push_back({"trunk_prob_drops", t, static_cast<double>(s.prob_drops),
                    "pkt"});
  }
  for (const auto& [t, s] : r.trunks) {
    rows.push_back({"trunk_tail_drops", t, static_cast<double>(s.tail_drops),
                    "pkt"});
  }
  for (const auto& [t, s] : r.trunks) {
    rows.push_back({"trunk_forwarded", t, static_cast<double>(s.forwarded),
                    "pkt"});
  }
  for (const auto& [t, s] : r.trunks) {
    rows.push_back({"trunk_drop_rate", t, s.drop_rate, "ratio"});
  }
  for (const auto& [t, s] : r.trunks) {
    rows.push_back({"trunk_cwnd_gt5", t, s.cwnd_gt5_fraction, "ratio"});
  }
  for (const auto& [t, s] : r.trunks) {
    rows.push_back({"trunk_p3_violations", t,
                    static_cast<double>(s.p3_violations), "pkt"});
  }
  for (const auto& [g, s] : r.delays) {
    rows.push_back({"delay_mean", g, s.mean, "s"});
  }
  for (const auto& [g, s] : r.delays) {
    rows.push_back({"delay_std", g, s.stddev, "s"});
  }
  for (const auto& [g, s] : r.delays) {
    rows.push_back({"delay_max", g, s.max, "s"});
  }
  for (const auto& [g, s] : r.delays) {
    rows.push_back({"delay_count", g, static_cast<double>(s.count), "1"});
  }
  return rows;
}

}  // namespace

std::string to_csv(const MetricsReport& r) {
  std::string out = "metric,entity,value,unit\n";
  for (const Row& row : rows_of(r)) {
    out += row.metric;
    out += ',';
    out += row.entity;
    out += ',';
    out += format_value(row.value);
    out += ',';
    out += row.unit;
    out += '\n';
  }
  return out;
}

namespace {

// Human-facing rounding; the CSV keeps full precision.
std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string to_text(const MetricsReport& r) {
  std::ostringstream os;
  os << "scenario " << r.scenario << "  seed " << r.seed << "  window ["
     << r.warmup << ", " << r.duration << ") s\n";
  if (!r.groups.empty()) {
    os << "\n  source group        throughput (B/s)   delivered (B)\n";
    for (const auto& [g, s] : r.groups) {
      os << "  " << std::left << std::setw(18) << g << std::right
         << std::setw(18) << format_short(s.throughput) << std::setw(16)
         << s.delivered_bytes << "\n";
    }
  }
  if (!r.queues.empty()) {
    os << "\n  queue               arrivals     drops   drop rate\n";
    for (const auto& [q, s] : r.queues) {
      os << "  " << std::left << std::setw(18) << q << std::right
         << std::setw(10) << s.arrivals << std::setw(10) << s.drops
         << std::setw(12) << format_short(s.drop_rate) << "\n";
    }
  }
  if (!r.trunks.empty()) {
    os << "\n  trunk               arrivals  p-drops  t-drops   drop rate"
          "   cwnd>5\n";
    for (const auto& [t, s] : r.trunks) {
      os << "  " << std::left << std::setw(18) << t << std::right
         << std::setw(10) << s.arrivals << std::setw(9) << s.prob_drops
         << std::setw(9) << s.tail_drops << std::setw(12)
         << format_short(s.drop_rate) << std::setw(9)
         << format_short(s.cwnd_gt5_fraction) << "\n";
    }
  }
  if (!r.delays.empty()) {
    os << "\n  delay group         mean (s)     std (s)     max (s)   count\n";
    for (const auto& [g, s] : r.delays) {
      os << "  " << std::left << std::setw(18) << g << std::right
         << std::setw(10) << format_short(s.mean) << std::setw(12)
         << format_short(s.stddev) << std::setw(12) << format_short(s.max)
         << std::setw(8) << s.count << "\n";
    }
  }
  return os.str();
}

std::string sweep_to_csv(const std::vector<MetricsReport>& runs) {
  std::string out = "metric,entity,value,unit\n";
  // Cross-seed aggregation keyed by (metric, entity), first-seen order.
  std::vector<std::tuple<std::string, std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<double>> agg;
  for (const MetricsReport& r : runs) {
    for (const Row& row : rows_of(r)) {
      out += row.metric;
      out += ',';
      out += row.entity;
      out += "#seed";
      out += std::to_string(r.seed);
      out += ',';
      out += format_value(row.value);
      out += ',';
      out += row.unit;
      out += '\n';
      auto key = std::make_pair(row.metric, row.entity);
      if (agg.find(key) == agg.end()) {
        order.emplace_back(row.metric, row.entity, row.unit);
      }
      agg[key].push_back(row.value);
    }
  }
  for (const auto& [metric, entity, unit] : order) {
    const std::vector<double>& vals = agg[{metric, entity}];
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    double stddev = std::sqrt(var / static_cast<double>(vals.size()));
    out += metric + ',' + entity + "#mean," + format_value(mean) + ',' + unit +
           '\n';
    out += metric + ',' + entity + "#std," + format_value(stddev) + ',' +
           unit + '\n';
  }
  return out;
}

}  // namespace trunksim::scen
