#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tlc/logic.hpp"

namespace tlc {

/* Guard over the automaton's predicate alphabet, stored as the set of
 * satisfying truth assignments (bit i of a mask = truth of alphabet[i]). */
struct Guard {
  int alphabet_size = 0;
  std::vector<std::uint32_t> sats;  // sorted, unique

  bool contains(std::uint32_t assignment) const;
  bool empty() const { return sats.empty(); }

  /* Minimal-ish DNF rendering over the alphabet, for DOT/JSON output. */
  std::string text(const std::vector<Predicate>& alphabet) const;
};

/* Deterministic, complete FSA over predicate guards. States are labeled
 * by their canonical residual formulas; "true" accepts, "false" traps.
 * State indices are breadth-first from the initial state. */
struct Fsa {
  std::vector<Predicate> alphabet;
  std::vector<std::string> labels;
  std::vector<Formula> label_asts;
  int initial = 0;
  std::vector<bool> accepting;
  int trap = -1;  // -1 when unreachable
  std::vector<std::vector<std::pair<int, Guard>>> edges;  // per source state
  // succ[q][assignment] -> unique successor
  std::vector<std::vector<int>> succ;

  int num_states() const { return static_cast<int>(labels.size()); }
  bool is_accepting(int q) const { return accepting[q]; }
  bool is_trap(int q) const { return q == trap; }
  bool is_terminal(int q) const { return accepting[q] || q == trap; }

  /* Truth assignment of the alphabet at a sample; predicate true iff its
   * robustness is strictly positive (boundary counts as unsatisfied). */
  std::uint32_t assignment_of(const StateSample& s) const;

  int step(int q, const StateSample& s) const;
  int step_assignment(int q, std::uint32_t assignment) const;

  /* D_phi^q: union of guards to non-self, non-trap successors. Constant
   * false at accepting and trap states. */
  Guard outgoing_disjunction(int q) const;

  /* Stable content hash used to tie Q-tables to the automaton. */
  std::string fingerprint() const;
};

/* Product automaton; states carry the component-state pairs. */
struct ProductFsa {
  Fsa fsa;
  std::vector<std::pair<int, int>> pairs;  // per product state
  Fsa left, right;                         // factor copies
  // Factor alphabet index -> bit in the product alphabet.
  std::vector<int> left_bits, right_bits;

  std::uint32_t project_left(std::uint32_t assignment) const;
  std::uint32_t project_right(std::uint32_t assignment) const;
};

inline constexpr int kMaxAlphabet = 16;

/* Compiles a formula to its FSA by symbolic formula progression over all
 * truth assignments of the atomic-predicate alphabet. Throws
 * std::invalid_argument when the alphabet exceeds kMaxAlphabet. */
Fsa translate(const Formula& formula);

ProductFsa product(const Fsa& f1, const Fsa& f2);

/* Accepts iff stepping through every sample of the trace from the initial
 * state ends in an accepting state. */
bool accepts(const Fsa& fsa, const Trace& trace);

std::string to_dot(const Fsa& fsa);

std::string fsa_to_json(const Fsa& fsa);
Fsa fsa_from_json(const std::string& json_text);

}  // namespace tlc
