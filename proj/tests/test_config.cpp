#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "trunksim/cli/config_file.hpp"

using namespace trunksim;

TEST_CASE("builtin names") {
  auto names = cli::builtin_names();
  REQUIRE(names.size() == 5);
  CHECK(cli::is_builtin("fig2:a"));
  CHECK(cli::is_builtin("fig3:off"));
  CHECK(!cli::is_builtin("fig4:z"));
  for (const auto& n : names) {
    CHECK_NOTHROW(cli::builtin_config(n));
  }
}

TEST_CASE("builtin passthrough matches the builder") {
  CHECK(cli::builtin_config("fig2:c") == scen::build_web_vs_ftp('c'));
  CHECK(cli::builtin_config("fig3:on") == scen::build_eight_sites(true));
  CHECK(cli::parse_config("fig2:a") == scen::build_web_vs_ftp('a'));
}

TEST_CASE("serialize-parse round trip for every builtin") {
  for (const auto& n : cli::builtin_names()) {
    scen::ScenarioConfig cfg = cli::builtin_config(n);
    std::string doc = cli::serialize_config(cfg);
    CHECK(cli::parse_config_text(doc) == cfg);
  }
  scen::ScenarioConfig fair = scen::build_fair_trunks();
  CHECK(cli::parse_config_text(cli::serialize_config(fair)) == fair);
}

TEST_CASE("parse handles comments, blank lines and field order") {
  std::string doc =
      "# minimal two-node setup\n"
      "scenario mini\n"
      "\n"
      "link up a b 1000000 0.001 10  # forward path\n"
      "link down b a 1000000 0.001 10\n"
      "source ftp a b greedy 2\n"
      "duration 30\n"
      "warmup 5\n"
      "seed 42\n";
  scen::ScenarioConfig cfg = cli::parse_config_text(doc);
  CHECK(cfg.name == "mini");
  CHECK(cfg.duration == 30.0);
  CHECK(cfg.warmup == 5.0);
  CHECK(cfg.seed == 42);
  REQUIRE(cfg.links.size() == 2);
  CHECK(cfg.links[0].capacity_pkts == 10);
  REQUIRE(cfg.sources.size() == 1);
  CHECK(cfg.sources[0].kind == scen::SourceKind::kGreedyFtp);
  CHECK(cli::parse_config_text(cli::serialize_config(cfg)) == cfg);
}

TEST_CASE("zero bandwidth is rejected with the link named") {
  std::string doc =
      "scenario bad\n"
      "link up a b 0 0.001 10\n"
      "link down b a 1000000 0.001 10\n"
      "source ftp a b greedy 1\n";
  try {
    cli::parse_config_text(doc);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("up") != std::string::npos);
    CHECK(std::string(e.what()).find("bandwidth") != std::string::npos);
  }
}

TEST_CASE("unknown fields are rejected with a line number") {
  try {
    cli::parse_config_text("scenario x\nbogus 1 2 3\n");
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("bogus") != std::string::npos);
  }
}

TEST_CASE("malformed numbers and arity are diagnosed") {
  CHECK_THROWS_AS(cli::parse_config_text("duration soon\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_config_text("link up a b 1000\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_config_text("source g a b carrier 3\n"),
                  std::invalid_argument);
}

TEST_CASE("trunk lines round-trip their full configuration") {
  std::string doc =
      "scenario t\n"
      "link up a b 1000000 0.001 10\n"
      "link down b a 1000000 0.001 10\n"
      "source ftp a b greedy 1\n"
      "trunk tr a b 0.25 500000 1500 0.4 0.7\n";
  scen::ScenarioConfig cfg = cli::parse_config_text(doc);
  REQUIRE(cfg.trunks.size() == 1);
  CHECK(cfg.trunks[0].cfg.rtt_up == 0.25);
  CHECK(cfg.trunks[0].cfg.trunk_bw == 500000.0);
  CHECK(cfg.trunks[0].cfg.drop_threshold_fraction == 0.4);
  CHECK(cfg.trunks[0].cfg.activity_window == 0.7);
  CHECK(cli::parse_config_text(cli::serialize_config(cfg)) == cfg);
}

TEST_CASE("parse_config reads scenario files from disk") {
  std::string path = "test_config_tmp.conf";
  {
    std::ofstream f(path, std::ios::binary);
    f << cli::serialize_config(scen::build_web_vs_ftp('b'));
  }
  scen::ScenarioConfig cfg = cli::parse_config(path);
  CHECK(cfg == scen::build_web_vs_ftp('b'));
  std::remove(path.c_str());
  CHECK_THROWS_AS(cli::parse_config("no_such_file.conf"),
                  std::invalid_argument);
}
