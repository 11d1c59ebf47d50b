#pragma once

#include <random>

#include "tlc/automaton.hpp"
#include "tlc/environment.hpp"
#include "tlc/logic.hpp"

namespace tlc::testing {

/* Boolean finite-trace semantics by direct structural recursion; kept
 * independent of the quantitative evaluator so the two can cross-check
 * each other. */
inline bool bool_sat(const Trace& tr, const Formula& f, std::size_t t) {
  switch (f->kind) {
    case NodeKind::True:
      return true;
    case NodeKind::False:
      return false;
    case NodeKind::Pred:
      return f->pred.robustness(tr[t]) > 0.0;
    case NodeKind::Not:
      return !bool_sat(tr, f->kids[0], t);
    case NodeKind::And:
      for (const auto& k : f->kids)
        if (!bool_sat(tr, k, t)) return false;
      return true;
    case NodeKind::Or:
      for (const auto& k : f->kids)
        if (bool_sat(tr, k, t)) return true;
      return false;
    case NodeKind::Eventually:
      for (std::size_t u = t; u < tr.size(); ++u)
        if (bool_sat(tr, f->kids[0], u)) return true;
      return false;
    case NodeKind::Next:
      return t + 1 < tr.size() && bool_sat(tr, f->kids[0], t + 1);
    case NodeKind::Until:
      for (std::size_t u = t; u < tr.size(); ++u) {
        if (!bool_sat(tr, f->kids[1], u)) continue;
        bool prefix = true;
        for (std::size_t w = t; w < u && prefix; ++w)
          prefix = bool_sat(tr, f->kids[0], w);
        if (prefix) return true;
      }
      return false;
    case NodeKind::Then:
      // left holds at some u, right at some strictly later point
      for (std::size_t u = t; u < tr.size(); ++u) {
        if (!bool_sat(tr, f->kids[0], u)) continue;
        for (std::size_t w = u + 1; w < tr.size(); ++w)
          if (bool_sat(tr, f->kids[1], w)) return true;
      }
      return false;
  }
  return false;
}

/* Pool of atomic predicates over x and y whose robustness is never zero
 * on traces produced by random_trace below (fractional offsets keep every
 * linear combination away from the integer thresholds). */
inline std::vector<Predicate> predicate_pool() {
  auto make = [](std::map<std::string, double> coeffs, double thr, Cmp cmp) {
    Predicate p;
    p.coeffs = std::move(coeffs);
    p.threshold = thr;
    p.cmp = cmp;
    return p;
  };
  return {
      make({{"x", 1.0}}, 3.0, Cmp::Less),
      make({{"y", 1.0}}, 2.0, Cmp::Greater),
      make({{"x", 1.0}, {"y", 1.0}}, 5.0, Cmp::Less),
      make({{"x", 1.0}, {"y", -1.0}}, 1.0, Cmp::Greater),
  };
}

class RandomFormula {
 public:
  explicit RandomFormula(std::uint64_t seed) : rng_(seed), pool_(predicate_pool()) {}

  Formula operator()(int max_depth = 4) { return gen(max_depth); }

  Trace random_trace(int max_len = 10) {
    std::uniform_int_distribution<int> len(1, max_len);
    std::uniform_int_distribution<int> cell(0, 6);
    Trace tr;
    int n = len(rng_);
    for (int i = 0; i < n; ++i) {
      tr.push_back({{"x", cell(rng_) + 0.37}, {"y", cell(rng_) + 0.81}});
    }
    return tr;
  }

 private:
  Formula leaf() {
    std::uniform_int_distribution<int> kind(0, 4);
    std::uniform_int_distribution<int> which(0, static_cast<int>(pool_.size()) - 1);
    int k = kind(rng_);
    if (k == 4) return make_true();
    Formula p = make_pred(pool_[which(rng_)]);
    return k >= 2 ? make_not(p) : p;
  }

  Formula gen(int depth) {
    if (depth <= 0) return leaf();
    std::uniform_int_distribution<int> op(0, 7);
    switch (op(rng_)) {
      case 0:
      case 1:
        return leaf();
      case 2:
        return make_and({gen(depth - 1), gen(depth - 1)});
      case 3:
        return make_or({gen(depth - 1), gen(depth - 1)});
      case 4:
        return make_eventually(gen(depth - 1));
      case 5:
        return make_next(gen(depth - 1));
      case 6:
        return make_until(gen(depth - 1), gen(depth - 1));
      default:
        return make_then(gen(depth - 1), gen(depth - 1));
    }
  }

  std::mt19937_64 rng_;
  std::vector<Predicate> pool_;
};

/* Deterministic 3-state chain: x in {0,1,2}, actions [right, stay],
 * right saturates at x = 2. Fixed start at x = 0. */
class ChainMdp : public DiscreteMdp {
 public:
  int num_states() const override { return 3; }
  int num_actions() const override { return 2; }
  StateSample sample_of(int s) const override {
    return {{"x", static_cast<double>(s)}};
  }
  int reset(Rng&) const override { return 0; }
  int step(int s, int action, Rng&) const override {
    return action == 0 ? std::min(s + 1, 2) : s;
  }
  bool has_transition_matrix() const override { return true; }
  double transition_prob(int s, int action, int next) const override {
    int target = action == 0 ? std::min(s + 1, 2) : s;
    return next == target ? 1.0 : 0.0;
  }
  std::vector<int> reset_support() const override { return {0}; }
};

/* The paper's grid-world task setup. */
inline std::map<std::string, std::string> paper_macros() {
  return {{"a", "x > 1 & x < 3 & y > 1 & y < 3"},
          {"b", "x > 4 & x < 6 & y > 4 & y < 6"},
          {"c", "x > 1 & x < 3 & y > 6 & y < 8"}};
}

inline Formula parse_grid(const std::string& text,
                          const std::map<std::string, std::string>& macro_texts =
                              paper_macros()) {
  std::set<std::string> features{"x", "y"};
  std::map<std::string, Formula> macros;
  for (const auto& [name, body] : macro_texts)
    macros[name] = parse_formula(body, features);
  return parse_formula(text, features, macros);
}

}  // namespace tlc::testing
