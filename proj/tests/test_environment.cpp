#include <doctest.h>

#include "helpers.hpp"
#include "tlc/environment.hpp"

using namespace tlc;
using namespace tlc::testing;

TEST_CASE("grid clamps at boundaries") {
  GridWorld g(10, 8, 0.0);  // deterministic
  Rng rng(0);
  int corner = g.index_of(0, 0);
  CHECK(g.step(corner, kLeft, rng) == corner);
  CHECK(g.step(corner, kDown, rng) == corner);
  CHECK(g.step(corner, kStay, rng) == corner);
  CHECK(g.step(corner, kRight, rng) == g.index_of(1, 0));
  CHECK(g.step(corner, kUp, rng) == g.index_of(0, 1));
}

TEST_CASE("slip mixture frequency") {
  GridWorld g;
  Rng rng(123);
  int start = g.index_of(4, 4);
  int target = g.index_of(4, 5);  // up
  int hits = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) hits += g.step(start, kUp, rng) == target;
  double freq = static_cast<double>(hits) / n;
  CHECK(freq == doctest::Approx(0.8 + 0.2 / 5).epsilon(0.03));
}

TEST_CASE("exact transition matrix matches empirical frequencies") {
  GridWorld g;
  Rng rng(7);
  int start = g.index_of(0, 3);
  const int n = 20000;
  std::map<int, int> counts;
  for (int i = 0; i < n; ++i) counts[g.step(start, kLeft, rng)]++;
  double total_p = 0.0;
  for (int s2 = 0; s2 < g.num_states(); ++s2) {
    double p = g.transition_prob(start, kLeft, s2);
    total_p += p;
    double freq = static_cast<double>(counts[s2]) / n;
    CHECK(freq == doctest::Approx(p).epsilon(0.05).scale(1.0));
  }
  CHECK(total_p == doctest::Approx(1.0));
}

TEST_CASE("augmented step rewards exactly the automaton advance") {
  GridWorld g;
  FsaAugmentedMdp env(g, translate(parse_grid("F a")), 200);
  Rng rng(5);

  // drive many random steps; reward iff q changed to a non-trap state
  for (int e = 0; e < 20; ++e) {
    auto ep = env.reset(rng);
    while (!ep.done) {
      int q_before = ep.q;
      auto res = env.step(ep, std::uniform_int_distribution<int>(0, 4)(rng), rng);
      bool advanced = ep.q != q_before && !env.fsa().is_trap(ep.q);
      CHECK((res.reward == 1.0) == advanced);
      CHECK(ep.t <= 200);
    }
  }
}

TEST_CASE("augmented transition factorizes") {
  GridWorld g;
  FsaAugmentedMdp env(g, translate(parse_grid("F a")), 200);
  Rng rng(99);
  // from the cell left of the goal, moving right: chi-square of the
  // empirical (s', q') distribution against p(s'|s,a) * 1(q'=delta(q,s'))
  int s0 = g.index_of(1, 2);
  const int n = 10000;
  std::map<std::pair<int, int>, int> counts;
  for (int i = 0; i < n; ++i) {
    FsaAugmentedMdp::Episode ep;
    ep.s = s0;
    ep.q = env.fsa().initial;
    env.step(ep, kRight, rng);
    counts[{ep.s, ep.q}]++;
  }
  double chi2 = 0.0;
  int dof = 0;
  for (int s2 = 0; s2 < g.num_states(); ++s2) {
    double p = g.transition_prob(s0, kRight, s2);
    if (p == 0.0) continue;
    int expected_q = env.next_q(env.fsa().initial, s2);
    // mass must sit entirely on the deterministic automaton successor
    for (auto& [key, count] : counts)
      if (key.first == s2) CHECK(key.second == expected_q);
    double expect = p * n;
    double got = counts[{s2, expected_q}];
    chi2 += (got - expect) * (got - expect) / expect;
    ++dof;
  }
  CHECK(dof >= 4);
  CHECK(chi2 < 25.0);  // generous for ~5 dof
}

TEST_CASE("reset inside the goal region advances without reward") {
  GridWorld g(10, 8, 0.2, std::make_pair(2, 2));  // spawn on goal a
  FsaAugmentedMdp env(g, translate(parse_grid("F a")), 200);
  Rng rng(1);
  auto ep = env.reset(rng);
  CHECK(env.fsa().is_accepting(ep.q));
  CHECK(ep.done);
  CHECK_THROWS_AS(env.step(ep, kStay, rng), std::logic_error);
}

TEST_CASE("zero horizon fails unless satisfied at reset") {
  GridWorld g(10, 8, 0.2, std::make_pair(0, 0));
  FsaAugmentedMdp env(g, translate(parse_grid("F a")), 0);
  Rng rng(2);
  auto report = evaluate_satisfaction(
      env, [](int, int) { return kStay; }, 20, rng);
  CHECK(report.success_rate == 0.0);
}

TEST_CASE("random policy solves F a given a long horizon") {
  GridWorld g;
  FsaAugmentedMdp env(g, translate(parse_grid("F a")), 2000);
  Rng rng(3);
  std::uniform_int_distribution<int> act(0, 4);
  auto report = evaluate_satisfaction(
      env, [&](int, int) { return act(rng); }, 200, rng);
  CHECK(report.success_rate >= 0.9);
  CHECK(report.mean_steps_to_accept > 0.0);
}
