#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace tlc {

/* A single observation: feature name -> value. For the grid world the
 * features are the integer coordinates x and y. */
using StateSample = std::map<std::string, double>;

/* Finite state trajectory, index 0 is time t = 0. Never empty. */
using Trace = std::vector<StateSample>;

/* Finite stand-in for +infinity so negation stays total. */
inline constexpr double kRhoMax = 1.0e6;

enum class Cmp { Less, Greater };

/* Affine predicate: sum(coeffs[f] * s[f]) <op> threshold. */
struct Predicate {
  std::map<std::string, double> coeffs;
  double threshold = 0.0;
  Cmp cmp = Cmp::Less;

  double value(const StateSample& s) const;

  /* Less: threshold - f(s); Greater: f(s) - threshold. Positive iff the
   * strict inequality holds; exactly 0 on the boundary. */
  double robustness(const StateSample& s) const;

  std::string text() const;
};

enum class NodeKind {
  True,
  False,  // never parsed; appears as the trap-state label
  Pred,
  Not,  // only directly above Pred
  And,
  Or,
  Eventually,
  Next,
  Until,
  Then
};

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  NodeKind kind;
  Predicate pred;              // Pred only
  std::vector<Formula> kids;   // operands, empty for True/False/Pred
};

Formula make_true();
Formula make_false();
Formula make_pred(Predicate p);
Formula make_not(Formula pred_child);
Formula make_and(std::vector<Formula> kids);
Formula make_or(std::vector<Formula> kids);
Formula make_eventually(Formula child);
Formula make_next(Formula child);
Formula make_until(Formula left, Formula right);
Formula make_then(Formula left, Formula right);

/* phi T psi is read as F(phi & X F psi). Kept in one place so the reading
 * can be swapped. */
Formula then_equivalence(Formula left, Formula right);

struct ParseError : std::runtime_error {
  ParseError(std::size_t position, const std::string& what)
      : std::runtime_error("parse error at position " +
                           std::to_string(position) + ": " + what),
        pos(position) {}
  std::size_t pos;
};

/* Parses the concrete syntax. `features` lists the registered feature
 * names; any other identifier must be bound in `macros`. Negation is
 * pushed down to predicates; negating a temporal subformula or `true`
 * is an error. `p => q` expands to `!p | q`. */
Formula parse_formula(const std::string& text,
                      const std::set<std::string>& features,
                      const std::map<std::string, Formula>& macros = {});

/* Canonical text form; parse(print(f)) reconstructs an identical AST. */
std::string print_formula(const Formula& f);

/* Flatten/sort/deduplicate and absorb true/false. Two residuals with the
 * same canonical print are treated as the same automaton state. */
Formula canonicalize(const Formula& f);

bool is_true(const Formula& f);
bool is_false(const Formula& f);

/* Distinct atomic predicates in syntactic order, deduplicated by text. */
std::vector<Predicate> collect_alphabet(const Formula& f);

/* Quantitative min/max robustness of trace[t:] against f.
 * Sign encodes satisfaction; rho == 0 counts as unsatisfied downstream. */
double robustness(const Trace& trace, const Formula& f, std::size_t t = 0);

double predicate_robustness(const StateSample& s, const Predicate& p);

}  // namespace tlc
