#include "trunksim/cli/config_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "trunksim/scen/report.hpp"

namespace trunksim::cli {

std::vector<std::string> builtin_names() {
  return {"fig2:a", "fig2:b", "fig2:c", "fig3:on", "fig3:off"};
}

bool is_builtin(const std::string& name) {
  for (const std::string& b : builtin_names()) {
    if (b == name) return true;
  }
  return false;
}

scen::ScenarioConfig builtin_config(const std::string& name) {
  if (name == "fig2:a") return scen::build_web_vs_ftp('a');
  if (name == "fig2:b") return scen::build_web_vs_ftp('b');
  if (name == "fig2:c") return scen::build_web_vs_ftp('c');
  if (name == "fig3:on") return scen::build_eight_sites(true);
  if (name == "fig3:off") return scen::build_eight_sites(false);
  throw std::invalid_argument("unknown builtin scenario: " + name);
}

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw std::invalid_argument("line " + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& tok, std::size_t line_no,
                    const std::string& field) {
  double v;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) {
    fail(line_no, field + ": not a number: '" + tok + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& tok, std::size_t line_no,
                        const std::string& field) {
  std::uint64_t v;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) {
    fail(line_no, field + ": not a non-negative integer: '" + tok + "'");
  }
  return v;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) {
    if (t[0] == '#') break;
    toks.push_back(t);
  }
  return toks;
}

void expect_arity(const std::vector<std::string>& toks, std::size_t n,
                  std::size_t line_no, const std::string& usage) {
  if (toks.size() != n) {
    fail(line_no, toks[0] + ": expected " + usage);
  }
}

}  // namespace

scen::ScenarioConfig parse_config_text(const std::string& text) {
  scen::ScenarioConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string& key = toks[0];
    if (key == "scenario") {
      expect_arity(toks, 2, line_no, "scenario <name>");
      cfg.name = toks[1];
    } else if (key == "duration") {
      expect_arity(toks, 2, line_no, "duration <seconds>");
      cfg.duration = parse_double(toks[1], line_no, "duration");
    } else if (key == "warmup") {
      expect_arity(toks, 2, line_no, "warmup <seconds>");
      cfg.warmup = parse_double(toks[1], line_no, "warmup");
    } else if (key == "seed") {
      expect_arity(toks, 2, line_no, "seed <integer>");
      cfg.seed = parse_u64(toks[1], line_no, "seed");
    } else if (key == "link") {
      expect_arity(toks, 7, line_no,
                   "link <name> <from> <to> <bytes/s> <prop_s> <cap_pkts>");
      scen::LinkSpec l;
      l.name = toks[1];
      l.from = toks[2];
      l.to = toks[3];
      l.bandwidth_Bps = parse_double(toks[4], line_no, "link " + l.name);
      l.propagation_s = parse_double(toks[5], line_no, "link " + l.name);
      l.capacity_pkts = static_cast<std::size_t>(
          parse_u64(toks[6], line_no, "link " + l.name));
      cfg.links.push_back(std::move(l));
    } else if (key == "source") {
      if (toks.size() < 5) {
        fail(line_no,
             "source: expected source <group> <node> <dst> greedy <count> | "
             "source <group> <node> <dst> web <count> <bytes>");
      }
      scen::SourceSpec s;
      s.group = toks[1];
      s.node = toks[2];
      s.dst = toks[3];
      const std::string& kind = toks[4];
      if (kind == "greedy") {
        expect_arity(toks, 6, line_no,
                     "source <group> <node> <dst> greedy <count>");
        s.kind = scen::SourceKind::kGreedyFtp;
        s.count = static_cast<std::uint32_t>(
            parse_u64(toks[5], line_no, "source " + s.group));
      } else if (kind == "web") {
        expect_arity(toks, 7, line_no,
                     "source <group> <node> <dst> web <count> <bytes>");
        s.kind = scen::SourceKind::kWebSession;
        s.count = static_cast<std::uint32_t>(
            parse_u64(toks[5], line_no, "source " + s.group));
        s.transfer_bytes = parse_u64(toks[6], line_no, "source " + s.group);
      } else {
        fail(line_no, "source " + s.group + ": unknown kind '" + kind + "'");
      }
      cfg.sources.push_back(std::move(s));
    } else if (key == "trunk") {
      expect_arity(toks, 9, line_no,
                   "trunk <name> <from> <to> <rtt_up_s> <bytes/s> "
                   "<pkt_size> <threshold_frac> <activity_window_s>");
      scen::TrunkSpec t;
      t.name = toks[1];
      t.from = toks[2];
      t.to = toks[3];
      t.cfg.rtt_up = parse_double(toks[4], line_no, "trunk " + t.name);
      t.cfg.trunk_bw = parse_double(toks[5], line_no, "trunk " + t.name);
      t.cfg.pkt_size = static_cast<std::uint32_t>(
          parse_u64(toks[6], line_no, "trunk " + t.name));
      t.cfg.drop_threshold_fraction =
          parse_double(toks[7], line_no, "trunk " + t.name);
      t.cfg.activity_window =
          parse_double(toks[8], line_no, "trunk " + t.name);
      cfg.trunks.push_back(std::move(t));
    } else {
      fail(line_no, "unknown field '" + key + "'");
    }
  }
  scen::validate(cfg);
  return cfg;
}

std::string serialize_config(const scen::ScenarioConfig& cfg) {
  std::string out;
  out += "scenario " + cfg.name + "\n";
  out += "duration " + scen::format_value(cfg.duration) + "\n";
  out += "warmup " + scen::format_value(cfg.warmup) + "\n";
  out += "seed " + std::to_string(cfg.seed) + "\n";
  for (const scen::LinkSpec& l : cfg.links) {
    out += "link " + l.name + " " + l.from + " " + l.to + " " +
           scen::format_value(l.bandwidth_Bps) + " " +
           scen::format_value(l.propagation_s) + " " +
           std::to_string(l.capacity_pkts) + "\n";
  }
  for (const scen::SourceSpec& s : cfg.sources) {
    out += "source " + s.group + " " + s.node + " " + s.dst;
    if (s.kind == scen::SourceKind::kGreedyFtp) {
      out += " greedy " + std::to_string(s.count) + "\n";
    } else {
      out += " web " + std::to_string(s.count) + " " +
             std::to_string(s.transfer_bytes) + "\n";
    }
  }
  for (const scen::TrunkSpec& t : cfg.trunks) {
    out += "trunk " + t.name + " " + t.from + " " + t.to + " " +
           scen::format_value(t.cfg.rtt_up) + " " +
           scen::format_value(t.cfg.trunk_bw) + " " +
           std::to_string(t.cfg.pkt_size) + " " +
           scen::format_value(t.cfg.drop_threshold_fraction) + " " +
           scen::format_value(t.cfg.activity_window) + "\n";
  }
  return out;
}

scen::ScenarioConfig parse_config(const std::string& source) {
  if (is_builtin(source)) return builtin_config(source);
  std::ifstream f(source, std::ios::binary);
  if (!f) {
    throw std::invalid_argument("cannot read config file: " + source);
  }
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace trunksim::cli
