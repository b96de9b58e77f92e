// Batch front end: run a built-in or file-defined scenario under one seed or
// a seed sweep, and emit CSV or a text table.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trunksim/cli/config_file.hpp"
#include "trunksim/scen/report.hpp"
#include "trunksim/scen/scenario.hpp"

namespace {

struct SeedRange {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
};

SeedRange parse_seed_range(const std::string& s) {
  auto pos = s.find("..");
  if (pos == std::string::npos) {
    throw std::invalid_argument("--seeds expects the form N..M");
  }
  SeedRange r;
  r.lo = std::stoull(s.substr(0, pos));
  r.hi = std::stoull(s.substr(pos + 2));
  if (r.hi < r.lo) {
    throw std::invalid_argument("--seeds range is empty");
  }
  return r;
}

void write_output(const std::string& path, const std::string& payload) {
  if (path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::invalid_argument("cannot write output file: " + path);
  }
  f << payload;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trunksim: TCP trunking scenario runner"};
  app.require_subcommand(1);

  std::string scenario_arg;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string seeds_arg;
  std::string out_path;
  std::string format = "csv";

  CLI::App* run = app.add_subcommand("run", "run a scenario");
  run->add_option("scenario", scenario_arg,
                  "builtin name or path to a config file")
      ->required();
  run->add_option("--seed", seed, "root seed (default: config's seed)")
      ->each([&](const std::string&) { seed_given = true; });
  run->add_option("--seeds", seeds_arg, "seed sweep N..M");
  run->add_option("--out", out_path, "output file (default: stdout)");
  run->add_option("--format", format, "csv or text")
      ->check(CLI::IsMember({"csv", "text"}));

  CLI::App* list = app.add_subcommand("list", "print builtin scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const std::string& b : trunksim::cli::builtin_names()) {
        std::cout << b << "\n";
      }
      return 0;
    }
    trunksim::scen::ScenarioConfig cfg =
        trunksim::cli::parse_config(scenario_arg);
    std::vector<std::uint64_t> seeds;
    if (!seeds_arg.empty()) {
      SeedRange r = parse_seed_range(seeds_arg);
      for (std::uint64_t s = r.lo; s <= r.hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(seed_given ? seed : cfg.seed);
    }

    std::vector<trunksim::scen::MetricsReport> reports;
    reports.reserve(seeds.size());
    for (std::uint64_t s : seeds) {
      reports.push_back(trunksim::scen::run_scenario(cfg, s));
    }

    std::string payload;
    if (format == "csv") {
      payload = seeds.size() == 1 ? trunksim::scen::to_csv(reports.front())
                                  : trunksim::scen::sweep_to_csv(reports);
    } else {
      for (const auto& r : reports) {
        if (!payload.empty()) payload += "\n";
        payload += trunksim::scen::to_text(r);
      }
    }
    write_output(out_path, payload);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
