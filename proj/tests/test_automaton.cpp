#include <doctest.h>

#include "helpers.hpp"
#include "tlc/automaton.hpp"

using namespace tlc;
using namespace tlc::testing;

namespace {

StateSample xy(double x, double y) { return {{"x", x}, {"y", y}}; }

int count_accepting(const Fsa& f) {
  int n = 0;
  for (int q = 0; q < f.num_states(); ++q) n += f.accepting[q];
  return n;
}

}  // namespace

TEST_CASE("translate F a") {
  Fsa f = translate(parse_grid("F a"));
  CHECK(f.num_states() == 2);
  CHECK(f.trap == -1);
  CHECK(count_accepting(f) == 1);
  CHECK(f.labels[f.initial] != "true");

  // progress on the goal cell, self-loop elsewhere, accept absorbs
  int qf = f.step(f.initial, xy(2, 2));
  CHECK(f.is_accepting(qf));
  CHECK(f.step(f.initial, xy(0, 0)) == f.initial);
  CHECK(f.step(qf, xy(0, 0)) == qf);
  CHECK(f.step(qf, xy(2, 2)) == qf);
}

TEST_CASE("translate true") {
  Fsa f = translate(make_true());
  CHECK(f.num_states() == 1);
  CHECK(f.is_accepting(f.initial));
  CHECK(f.edges[0].size() == 1);  // only the self-loop
}

TEST_CASE("translate the paper's phi1") {
  Fsa f = translate(parse_grid("F a & F b"));
  CHECK(f.num_states() == 4);
  CHECK(f.trap == -1);
  CHECK(count_accepting(f) == 1);

  // both goals, in either order, lead to acceptance
  int q = f.initial;
  q = f.step(q, xy(2, 2));  // reach a
  CHECK(!f.is_accepting(q));
  q = f.step(q, xy(5, 5));  // reach b
  CHECK(f.is_accepting(q));

  q = f.initial;
  q = f.step(q, xy(5, 5));
  q = f.step(q, xy(2, 2));
  CHECK(f.is_accepting(q));
}

TEST_CASE("next and until produce a reachable trap") {
  Fsa f = translate(parse_grid("X a"));
  CHECK(f.trap != -1);
  int q = f.step(f.initial, xy(0, 0));  // first observation is don't-care
  q = f.step(q, xy(0, 0));              // a must hold here
  CHECK(q == f.trap);
  CHECK(f.step(f.trap, xy(2, 2)) == f.trap);  // trap absorbs
}

TEST_CASE("outgoing disjunction") {
  Fsa f = translate(parse_grid("F a"));
  Guard d = f.outgoing_disjunction(f.initial);
  CHECK(d.contains(f.assignment_of(xy(2, 2))));
  CHECK(!d.contains(f.assignment_of(xy(0, 0))));

  int qf = f.step(f.initial, xy(2, 2));
  CHECK(f.outgoing_disjunction(qf).empty());

  Fsa f1 = translate(parse_grid("F a & F b"));
  Guard d1 = f1.outgoing_disjunction(f1.initial);
  CHECK(d1.contains(f1.assignment_of(xy(2, 2))));   // a
  CHECK(d1.contains(f1.assignment_of(xy(5, 5))));   // b
  CHECK(!d1.contains(f1.assignment_of(xy(0, 0))));
}

TEST_CASE("alphabet overflow is rejected") {
  std::vector<Formula> kids;
  for (int i = 0; i < 17; ++i) {
    Predicate p{{{"x", 1.0}}, static_cast<double>(i) + 0.5, Cmp::Less};
    kids.push_back(make_eventually(make_pred(p)));
  }
  CHECK_THROWS_AS(translate(make_and(kids)), std::invalid_argument);
}

TEST_CASE("determinism and completeness by assignment enumeration") {
  RandomFormula gen(23);
  for (int i = 0; i < 50; ++i) {
    Fsa f = translate(gen(4));
    const std::uint32_t total = 1u << f.alphabet.size();
    for (int q = 0; q < f.num_states(); ++q) {
      std::vector<int> hits(total, 0);
      for (const auto& [to, guard] : f.edges[q])
        for (std::uint32_t a : guard.sats) hits[a]++;
      for (std::uint32_t a = 0; a < total; ++a) CHECK(hits[a] == 1);
    }
  }
}

TEST_CASE("language equivalence with the robustness oracle") {
  RandomFormula gen(29);
  for (int i = 0; i < 60; ++i) {
    Formula phi = gen(4);
    Fsa f = translate(phi);
    for (int j = 0; j < 40; ++j) {
      Trace tr = gen.random_trace(10);
      CHECK(accepts(f, tr) == (robustness(tr, phi) > 0.0));
    }
  }
}

TEST_CASE("product of the grid tasks has 8 states") {
  Fsa f1 = translate(parse_grid("F a & F b"));
  Fsa f2 = translate(parse_grid("F c"));
  ProductFsa pf = product(f1, f2);
  CHECK(pf.fsa.num_states() == 8);
  CHECK(count_accepting(pf.fsa) == 1);
  CHECK(pf.fsa.trap == -1);

  // visiting a, b, c in any order accepts
  int q = pf.fsa.initial;
  q = pf.fsa.step(q, xy(2, 2));
  q = pf.fsa.step(q, xy(2, 7));
  q = pf.fsa.step(q, xy(5, 5));
  CHECK(pf.fsa.is_accepting(q));
}

TEST_CASE("product with the true automaton is the identity") {
  Fsa f = translate(parse_grid("F a & F b"));
  ProductFsa pf = product(f, translate(make_true()));
  CHECK(pf.fsa.num_states() == f.num_states());
  RandomFormula gen(31);
  for (int i = 0; i < 100; ++i) {
    Trace tr = gen.random_trace(10);
    CHECK(accepts(pf.fsa, tr) == accepts(f, tr));
  }
}

TEST_CASE("product acceptance is the conjunction of factor acceptances") {
  RandomFormula gen(37);
  for (int i = 0; i < 30; ++i) {
    Formula phi1 = gen(3);
    Formula phi2 = gen(3);
    Fsa f1 = translate(phi1);
    Fsa f2 = translate(phi2);
    ProductFsa pf = product(f1, f2);
    for (int j = 0; j < 40; ++j) {
      Trace tr = gen.random_trace(10);
      CHECK(accepts(pf.fsa, tr) == (accepts(f1, tr) && accepts(f2, tr)));
    }
  }
}

TEST_CASE("product is idempotent on the language") {
  Formula phi = parse_grid("F a");
  Fsa f = translate(phi);
  ProductFsa pf = product(f, f);
  RandomFormula gen(41);
  for (int i = 0; i < 100; ++i) {
    Trace tr = gen.random_trace(10);
    CHECK(accepts(pf.fsa, tr) == accepts(f, tr));
  }
}

TEST_CASE("dot output") {
  Fsa t = translate(make_true());
  std::string dot = to_dot(t);
  CHECK(dot.find("doublecircle") != std::string::npos);

  Fsa f = translate(parse_grid("F a"));
  std::string dot_f = to_dot(f);
  // two states, three edges: self-loop, progress, accept self-loop
  CHECK(dot_f.find("q0 -> q0") != std::string::npos);
  CHECK(dot_f.find("q0 -> q1") != std::string::npos);
  CHECK(dot_f.find("q1 -> q1") != std::string::npos);

  ProductFsa pf = product(translate(parse_grid("F a & F b")),
                          translate(parse_grid("F c")));
  int nodes = 0;
  std::string dot_p = to_dot(pf.fsa);
  for (std::size_t pos = 0; (pos = dot_p.find("label=", pos)) != std::string::npos;
       ++pos)
    ++nodes;
  CHECK(nodes >= 8);
}

TEST_CASE("json round trip") {
  RandomFormula gen(43);
  for (int i = 0; i < 20; ++i) {
    Fsa f = translate(gen(3));
    Fsa g = fsa_from_json(fsa_to_json(f));
    CHECK(g.labels == f.labels);
    CHECK(g.succ == f.succ);
    CHECK(g.initial == f.initial);
    CHECK(g.trap == f.trap);
    CHECK(g.fingerprint() == f.fingerprint());
  }
}

TEST_CASE("guard text renders simple cases") {
  Fsa f = translate(parse_formula("F (x < 3)", {"x", "y"}));
  bool found = false;
  for (const auto& [to, guard] : f.edges[f.initial]) {
    if (to != f.initial) {
      CHECK(guard.text(f.alphabet) == "x < 3");
      found = true;
    }
  }
  CHECK(found);
}
