#include <doctest.h>

#include "helpers.hpp"
#include "tlc/io.hpp"

using namespace tlc;
using namespace tlc::testing;

namespace {

const char* kConfig = R"({
  "environment": {"width": 10, "height": 8, "slip": 0.2, "horizon": 200, "start": "uniform"},
  "macros": {
    "a": "x > 1 & x < 3 & y > 1 & y < 3",
    "b": "x > 4 & x < 6 & y > 4 & y < 6",
    "c": "x > 1 & x < 3 & y > 6 & y < 8"
  },
  "formula": "F a & F b",
  "train": {"gamma": 0.95, "alpha": 0.1, "update_steps": 2000, "seed": 0},
  "eval": {"episodes": 100, "checkpoint_every": 200, "checkpoint_episodes": 50},
  "output_dir": "out"
})";

}  // namespace

TEST_CASE("experiment config round trip") {
  ExperimentConfig cfg = ExperimentConfig::from_json(kConfig);
  CHECK(cfg.env.width == 10);
  CHECK(cfg.env.height == 8);
  CHECK(cfg.env.slip == 0.2);
  CHECK(cfg.train.horizon == 200);
  CHECK(cfg.formula_text == "F a & F b");

  ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.hash() == cfg.hash());
  CHECK(back.to_json() == cfg.to_json());

  Formula f = cfg.parse();
  CHECK(f->kind == NodeKind::And);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(ExperimentConfig::from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{}"), ConfigError);  // no formula
  CHECK_THROWS_AS(
      ExperimentConfig::from_json(
          R"({"formula": "F a", "macros": {"a": "z < 1"}})"),
      ConfigError);  // unknown feature in macro
  CHECK_THROWS_AS(
      ExperimentConfig::from_json(
          R"({"formula": "F a", "train": {"alpha": 2.0}})"),
      ConfigError);
}

TEST_CASE("hash ignores seed and output location") {
  ExperimentConfig a = ExperimentConfig::from_json(kConfig);
  ExperimentConfig b = a;
  b.train.seed = 77;
  b.output_dir = "elsewhere";
  CHECK(a.hash() == b.hash());
  b.formula_text = "F c";
  CHECK(a.hash() != b.hash());
}

TEST_CASE("qtable serialization round trip") {
  QTable qt(3, 2, 5);
  qt.at(1, 1, 2) = 0.5;
  qt.at(2, 0, 4) = -0.25;
  qt.formula = "F a";
  qt.fsa_fingerprint = "deadbeef";
  qt.env_hash = "cafe";
  QTable back = qtable_from_json(qtable_to_json(qt));
  CHECK(back.data == qt.data);
  CHECK(back.formula == qt.formula);
  CHECK(back.fsa_fingerprint == qt.fsa_fingerprint);
  CHECK(back.env_hash == qt.env_hash);

  CHECK_THROWS_AS(qtable_from_json("{\"dims\":{}}"), ConfigError);
}

TEST_CASE("replay buffer serialization round trip") {
  ReplayBuffer buffer{{0, 1, 2, 0, 0}, {2, 3, 4, 0, 1}, {4, 0, 4, 1, 0}};
  std::string env_hash;
  ReplayBuffer back = buffer_from_json(buffer_to_json(buffer, "beef"), &env_hash);
  CHECK(env_hash == "beef");
  REQUIRE(back.size() == buffer.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    CHECK(back[i].s == buffer[i].s);
    CHECK(back[i].action == buffer[i].action);
    CHECK(back[i].s_next == buffer[i].s_next);
    CHECK(back[i].episode == buffer[i].episode);
    CHECK(back[i].t == buffer[i].t);
  }
}

TEST_CASE("metrics csv") {
  std::vector<MetricsRow> rows{{200, 0.5, 80.0, 1.0}, {400, 0.9, 40.5, 1.9}};
  std::string csv = metrics_to_csv(rows);
  CHECK(csv.find("step,success_rate,mean_episode_len,mean_return\n") == 0);
  CHECK(csv.find("200,0.5,80,1\n") != std::string::npos);
  CHECK(csv.find("400,0.9,40.5,1.9\n") != std::string::npos);
}

TEST_CASE("env config hash is stable and sensitive") {
  EnvConfig e1;
  EnvConfig e2;
  CHECK(e1.hash() == e2.hash());
  e2.slip = 0.3;
  CHECK(e1.hash() != e2.hash());
}
