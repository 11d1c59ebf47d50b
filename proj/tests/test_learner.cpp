#include <doctest.h>

#include "helpers.hpp"
#include "tlc/learner.hpp"

using namespace tlc;
using namespace tlc::testing;

namespace {

Formula chain_goal() {
  return parse_formula("F (x > 1)", {"x"});
}

}  // namespace

TEST_CASE("value iteration on the deterministic chain") {
  ChainMdp chain;
  FsaAugmentedMdp env(chain, translate(chain_goal()), 200);
  QTable oracle = value_iteration_oracle(env, 0.95);

  // reward on the second transition, discounted once
  CHECK(oracle.at(0, env.fsa().initial, 0) == doctest::Approx(0.95).epsilon(1e-3));
  CHECK(oracle.at(1, env.fsa().initial, 0) == doctest::Approx(1.0).epsilon(1e-3));

  // terminal automaton rows stay zero
  for (int q = 0; q < env.num_q(); ++q) {
    if (!env.terminal_q(q)) continue;
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 2; ++a) CHECK(oracle.at(s, q, a) == 0.0);
  }
}

TEST_CASE("q-learning converges to the oracle on the chain") {
  ChainMdp chain;
  FsaAugmentedMdp env(chain, translate(chain_goal()), 200);
  TrainConfig cfg;
  cfg.update_steps = 20000;
  cfg.seed = 4;
  auto result = q_learning_train(env, cfg);
  QTable oracle = value_iteration_oracle(env, cfg.gamma);
  auto reachable = reachable_augmented_states(env);
  CHECK(reachable.size() >= 2);
  for (auto [s, q] : reachable) {
    for (int a = 0; a < 2; ++a) {
      CHECK(result.table.at(s, q, a) ==
            doctest::Approx(oracle.at(s, q, a)).epsilon(1e-3).scale(1.0));
    }
  }
  CHECK(result.buffer.size() == 20000);
}

TEST_CASE("myopic limit equals one-step expected reward") {
  ChainMdp chain;
  FsaAugmentedMdp env(chain, translate(chain_goal()), 200);
  QTable q = value_iteration_oracle(env, 1e-12);
  int q0 = env.fsa().initial;
  CHECK(q.at(1, q0, 0) == doctest::Approx(1.0));  // right from x=1 pays now
  CHECK(q.at(0, q0, 0) == doctest::Approx(0.0).scale(1.0));
  CHECK(q.at(1, q0, 1) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("zero budget leaves the table at its initialization") {
  GridWorld g;
  FsaAugmentedMdp env(g, translate(parse_grid("F c")), 200);
  TrainConfig cfg;
  cfg.update_steps = 0;
  auto result = q_learning_train(env, cfg);
  for (double v : result.table.data) CHECK(v == 0.0);
  CHECK(result.buffer.empty());
}

TEST_CASE("greedy action tie-breaking") {
  QTable qt(2, 1, 3);
  CHECK(greedy_action(qt, 0, 0) == 0);  // all zero: lowest index
  qt.at(1, 0, 2) = 1.0;
  CHECK(greedy_action(qt, 1, 0) == 2);
  auto sub = extract_subpolicy(qt, 0);
  CHECK(sub == std::vector<int>{0, 2});
}

TEST_CASE("normalization") {
  QTable qt(2, 1, 2);
  qt.at(0, 0, 0) = 2.0;
  qt.at(1, 0, 1) = 0.5;
  QTable n = normalize_q(qt);
  CHECK(n.at(0, 0, 0) == doctest::Approx(1.0));
  CHECK(n.at(1, 0, 1) == doctest::Approx(0.25));
  for (int s = 0; s < 2; ++s) CHECK(greedy_action(n, s, 0) == greedy_action(qt, s, 0));

  QTable zero(2, 1, 2);
  CHECK_THROWS(normalize_q(zero));
}

TEST_CASE("training is deterministic given the seed") {
  GridWorld g;
  FsaAugmentedMdp env(g, translate(parse_grid("F c")), 200);
  TrainConfig cfg;
  cfg.update_steps = 3000;
  cfg.seed = 42;
  auto r1 = q_learning_train(env, cfg);
  auto r2 = q_learning_train(env, cfg);
  CHECK(r1.table.data == r2.table.data);
  CHECK(r1.buffer.size() == r2.buffer.size());
}

TEST_CASE("q values stay within the progress-edge bound") {
  GridWorld g;
  FsaAugmentedMdp env(g, translate(parse_grid("F a & F b")), 200);
  TrainConfig cfg;
  cfg.update_steps = 20000;
  cfg.seed = 8;
  auto result = q_learning_train(env, cfg);
  // at most 2 progress edges on any path, each pays at most 1
  for (double v : result.table.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 2.0);
  }
}

TEST_CASE("invalid train configs are rejected") {
  TrainConfig cfg;
  cfg.gamma = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = TrainConfig{};
  cfg.alpha = 1.5;
  CHECK_THROWS(cfg.validate());
}
