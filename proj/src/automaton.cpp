#include "tlc/automaton.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tlc/hash.hpp"

namespace tlc {

bool Guard::contains(std::uint32_t assignment) const {
  return std::binary_search(sats.begin(), sats.end(), assignment);
}

namespace {

std::string literal_text(const Predicate& p, bool positive) {
  if (positive) return p.text();
  return "!(" + p.text() + ")";
}

}  // namespace

std::string Guard::text(const std::vector<Predicate>& alphabet) const {
  const int n = alphabet_size;
  const std::uint32_t total = 1u << n;
  if (sats.empty()) return "false";
  if (sats.size() == total) return "true";

  // Greedy cube cover: grow each uncovered assignment into a maximal cube
  // contained in the satisfying set, then emit the cubes as a disjunction.
  auto inside = [&](std::uint32_t value, std::uint32_t care) {
    std::uint32_t free = ~care & (total - 1);
    // enumerate all completions of the free bits
    std::uint32_t sub = free;
    while (true) {
      if (!contains((value & care) | sub)) return false;
      if (sub == 0) break;
      sub = (sub - 1) & free;
    }
    return true;
  };

  std::set<std::uint32_t> covered;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> cubes;  // (care, value)
  for (std::uint32_t a : sats) {
    if (covered.count(a)) continue;
    std::uint32_t care = total - 1;
    for (int b = 0; b < n; ++b) {
      std::uint32_t trial = care & ~(1u << b);
      if (inside(a, trial)) care = trial;
    }
    cubes.emplace_back(care, a & care);
    std::uint32_t free = ~care & (total - 1);
    std::uint32_t sub = free;
    while (true) {
      covered.insert((a & care) | sub);
      if (sub == 0) break;
      sub = (sub - 1) & free;
    }
  }

  std::string out;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    if (i) out += " | ";
    auto [care, value] = cubes[i];
    if (care == 0) return "true";
    std::string cube;
    for (int b = 0; b < n; ++b) {
      if (!(care & (1u << b))) continue;
      if (!cube.empty()) cube += " & ";
      cube += literal_text(alphabet[b], value & (1u << b));
    }
    out += cubes.size() > 1 && care && (care & (care - 1)) ? "(" + cube + ")" : cube;
  }
  return out;
}

std::uint32_t Fsa::assignment_of(const StateSample& s) const {
  std::uint32_t a = 0;
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    if (alphabet[i].robustness(s) > 0.0) a |= 1u << i;
  }
  return a;
}

int Fsa::step(int q, const StateSample& s) const {
  return step_assignment(q, assignment_of(s));
}

int Fsa::step_assignment(int q, std::uint32_t assignment) const {
  return succ[q][assignment];
}

Guard Fsa::outgoing_disjunction(int q) const {
  Guard g;
  g.alphabet_size = static_cast<int>(alphabet.size());
  for (const auto& [to, guard] : edges[q]) {
    if (to == q || to == trap) continue;
    g.sats.insert(g.sats.end(), guard.sats.begin(), guard.sats.end());
  }
  std::sort(g.sats.begin(), g.sats.end());
  g.sats.erase(std::unique(g.sats.begin(), g.sats.end()), g.sats.end());
  return g;
}

std::string Fsa::fingerprint() const { return fnv1a_hex(fsa_to_json(*this)); }

// ---------------------------------------------------------------------------
// Translation by formula progression

namespace {

/* Residual obligation after observing one truth assignment. */
Formula progress(const Formula& f, std::uint32_t sigma,
                 const std::map<std::string, int>& pred_index) {
  switch (f->kind) {
    case NodeKind::True:
    case NodeKind::False:
      return f;
    case NodeKind::Pred: {
      int bit = pred_index.at(f->pred.text());
      return (sigma & (1u << bit)) ? make_true() : make_false();
    }
    case NodeKind::Not: {
      int bit = pred_index.at(f->kids[0]->pred.text());
      return (sigma & (1u << bit)) ? make_false() : make_true();
    }
    case NodeKind::And:
    case NodeKind::Or: {
      std::vector<Formula> kids;
      kids.reserve(f->kids.size());
      for (const auto& k : f->kids) kids.push_back(progress(k, sigma, pred_index));
      return f->kind == NodeKind::And ? make_and(std::move(kids))
                                      : make_or(std::move(kids));
    }
    case NodeKind::Eventually:
      return make_or({progress(f->kids[0], sigma, pred_index), f});
    case NodeKind::Next:
      // Strong next: another sample must exist. A plain `true` residual would
      // accept at end of trace, so the discharged obligation becomes F true.
      return is_true(f->kids[0]) ? make_eventually(make_true()) : f->kids[0];
    case NodeKind::Until:
      return make_or({progress(f->kids[1], sigma, pred_index),
                      make_and({progress(f->kids[0], sigma, pred_index), f})});
    case NodeKind::Then:
      return progress(then_equivalence(f->kids[0], f->kids[1]), sigma, pred_index);
  }
  throw std::logic_error("unreachable");
}

struct RawAutomaton {
  std::vector<Formula> states;
  std::vector<std::string> labels;
  std::vector<std::vector<int>> succ;  // [state][assignment]
};

RawAutomaton explore(const Formula& start, const std::map<std::string, int>& pred_index,
                     std::uint32_t num_assignments) {
  RawAutomaton raw;
  std::map<std::string, int> index_of;
  std::deque<int> frontier;
  auto intern = [&](const Formula& f) {
    std::string key = print_formula(f);
    auto it = index_of.find(key);
    if (it != index_of.end()) return it->second;
    int id = static_cast<int>(raw.states.size());
    index_of.emplace(key, id);
    raw.states.push_back(f);
    raw.labels.push_back(key);
    raw.succ.emplace_back();
    frontier.push_back(id);
    return id;
  };
  intern(start);
  while (!frontier.empty()) {
    int q = frontier.front();
    frontier.pop_front();
    Formula f = raw.states[q];
    raw.succ[q].resize(num_assignments);
    for (std::uint32_t a = 0; a < num_assignments; ++a) {
      Formula next = canonicalize(progress(f, a, pred_index));
      raw.succ[q][a] = intern(next);
    }
  }
  return raw;
}

}  // namespace

Fsa translate(const Formula& formula) {
  Formula start = canonicalize(formula);
  std::vector<Predicate> alphabet = collect_alphabet(start);
  if (alphabet.size() > kMaxAlphabet)
    throw std::invalid_argument("alphabet overflow: " +
                                std::to_string(alphabet.size()) +
                                " atomic predicates (max 16)");
  std::map<std::string, int> pred_index;
  for (std::size_t i = 0; i < alphabet.size(); ++i)
    pred_index.emplace(alphabet[i].text(), static_cast<int>(i));
  const std::uint32_t num_assignments = 1u << alphabet.size();

  RawAutomaton raw = explore(start, pred_index, num_assignments);
  const int n = static_cast<int>(raw.states.size());

  // States that cannot reach an accepting state behave as the trap.
  std::vector<bool> alive(n, false);
  for (int q = 0; q < n; ++q) alive[q] = raw.labels[q] == "true";
  bool changed = true;
  while (changed) {
    changed = false;
    for (int q = 0; q < n; ++q) {
      if (alive[q]) continue;
      for (std::uint32_t a = 0; a < num_assignments && !alive[q]; ++a) {
        if (alive[raw.succ[q][a]]) {
          alive[q] = true;
          changed = true;
        }
      }
    }
  }

  // Breadth-first reindexing from the initial state; dead states merge
  // into a single trap appended last (when reachable).
  std::vector<int> new_id(n, -1);
  std::vector<int> order;
  bool trap_reachable = false;
  if (!alive[0]) {
    trap_reachable = true;
  } else {
    std::deque<int> bfs{0};
    new_id[0] = 0;
    order.push_back(0);
    while (!bfs.empty()) {
      int q = bfs.front();
      bfs.pop_front();
      for (std::uint32_t a = 0; a < num_assignments; ++a) {
        int t = raw.succ[q][a];
        if (!alive[t]) {
          trap_reachable = true;
          continue;
        }
        if (new_id[t] == -1) {
          new_id[t] = static_cast<int>(order.size());
          order.push_back(t);
          bfs.push_back(t);
        }
      }
    }
  }

  Fsa fsa;
  fsa.alphabet = std::move(alphabet);
  int num_final = static_cast<int>(order.size()) + (trap_reachable ? 1 : 0);
  fsa.labels.resize(num_final);
  fsa.label_asts.resize(num_final);
  fsa.accepting.assign(num_final, false);
  fsa.succ.assign(num_final, std::vector<int>(num_assignments, 0));
  fsa.trap = trap_reachable ? num_final - 1 : -1;
  fsa.initial = alive.empty() || !alive[0] ? fsa.trap : 0;
  if (fsa.initial < 0) fsa.initial = 0;  // degenerate: single trap state

  for (std::size_t i = 0; i < order.size(); ++i) {
    int q = order[i];
    fsa.labels[i] = raw.labels[q];
    fsa.label_asts[i] = raw.states[q];
    fsa.accepting[i] = raw.labels[q] == "true";
    for (std::uint32_t a = 0; a < num_assignments; ++a) {
      int t = raw.succ[q][a];
      fsa.succ[i][a] = alive[t] ? new_id[t] : fsa.trap;
    }
  }
  if (trap_reachable) {
    fsa.labels[fsa.trap] = "false";
    fsa.label_asts[fsa.trap] = make_false();
    for (std::uint32_t a = 0; a < num_assignments; ++a) fsa.succ[fsa.trap][a] = fsa.trap;
  }

  // Group assignments with the same successor into one guard per edge.
  fsa.edges.resize(num_final);
  for (int q = 0; q < num_final; ++q) {
    std::map<int, Guard> by_succ;
    for (std::uint32_t a = 0; a < num_assignments; ++a) {
      Guard& g = by_succ[fsa.succ[q][a]];
      g.alphabet_size = static_cast<int>(fsa.alphabet.size());
      g.sats.push_back(a);
    }
    for (auto& [to, g] : by_succ) fsa.edges[q].emplace_back(to, std::move(g));
  }
  return fsa;
}

// ---------------------------------------------------------------------------
// Product automaton

std::uint32_t ProductFsa::project_left(std::uint32_t assignment) const {
  std::uint32_t a = 0;
  for (std::size_t i = 0; i < left_bits.size(); ++i)
    if (assignment & (1u << left_bits[i])) a |= 1u << i;
  return a;
}

std::uint32_t ProductFsa::project_right(std::uint32_t assignment) const {
  std::uint32_t a = 0;
  for (std::size_t i = 0; i < right_bits.size(); ++i)
    if (assignment & (1u << right_bits[i])) a |= 1u << i;
  return a;
}

ProductFsa product(const Fsa& f1, const Fsa& f2) {
  ProductFsa pf;
  pf.left = f1;
  pf.right = f2;

  // Merged alphabet, deduplicated by predicate text.
  std::vector<Predicate> alphabet = f1.alphabet;
  std::map<std::string, int> index_of;
  for (std::size_t i = 0; i < alphabet.size(); ++i)
    index_of.emplace(alphabet[i].text(), static_cast<int>(i));
  pf.left_bits.resize(f1.alphabet.size());
  for (std::size_t i = 0; i < f1.alphabet.size(); ++i)
    pf.left_bits[i] = static_cast<int>(i);
  pf.right_bits.resize(f2.alphabet.size());
  for (std::size_t i = 0; i < f2.alphabet.size(); ++i) {
    std::string key = f2.alphabet[i].text();
    auto it = index_of.find(key);
    if (it == index_of.end()) {
      it = index_of.emplace(key, static_cast<int>(alphabet.size())).first;
      alphabet.push_back(f2.alphabet[i]);
    }
    pf.right_bits[i] = it->second;
  }
  if (alphabet.size() > kMaxAlphabet)
    throw std::invalid_argument("alphabet overflow in product automaton");
  const std::uint32_t num_assignments = 1u << alphabet.size();

  Fsa& out = pf.fsa;
  out.alphabet = alphabet;

  // BFS over reachable pairs; every pair whose conjoined label is "false"
  // collapses into one trap state.
  std::map<std::pair<int, int>, int> id_of;
  std::deque<std::pair<int, int>> frontier;
  int trap_id = -1;
  std::vector<std::vector<int>> succ;

  auto label_of = [&](int q1, int q2) {
    return canonicalize(make_and({f1.label_asts[q1], f2.label_asts[q2]}));
  };
  auto intern = [&](int q1, int q2) {
    Formula lab = label_of(q1, q2);
    if (is_false(lab)) {
      if (trap_id == -1) trap_id = -2;  // reachable, index assigned later
      return -2;
    }
    auto it = id_of.find({q1, q2});
    if (it != id_of.end()) return it->second;
    int id = static_cast<int>(pf.pairs.size());
    id_of.emplace(std::make_pair(q1, q2), id);
    pf.pairs.emplace_back(q1, q2);
    out.labels.push_back(print_formula(lab));
    out.label_asts.push_back(lab);
    out.accepting.push_back(f1.accepting[q1] && f2.accepting[q2]);
    succ.emplace_back();
    frontier.emplace_back(q1, q2);
    return id;
  };

  intern(f1.initial, f2.initial);
  if (pf.pairs.empty()) {
    // Initial pair already failed; the product is a single trap state.
    out.labels = {"false"};
    out.label_asts = {make_false()};
    out.accepting = {false};
    out.initial = 0;
    out.trap = 0;
    out.succ.assign(1, std::vector<int>(num_assignments, 0));
    pf.pairs.emplace_back(f1.initial, f2.initial);
    out.edges.resize(1);
    Guard g;
    g.alphabet_size = static_cast<int>(alphabet.size());
    for (std::uint32_t a = 0; a < num_assignments; ++a) g.sats.push_back(a);
    out.edges[0].emplace_back(0, std::move(g));
    return pf;
  }

  while (!frontier.empty()) {
    auto [q1, q2] = frontier.front();
    frontier.pop_front();
    int q = id_of.at({q1, q2});
    succ[q].resize(num_assignments);
    for (std::uint32_t a = 0; a < num_assignments; ++a) {
      int t1 = f1.step_assignment(q1, pf.project_left(a));
      int t2 = f2.step_assignment(q2, pf.project_right(a));
      if (t1 == f1.trap || t2 == f2.trap) {
        if (trap_id == -1) trap_id = -2;
        succ[q][a] = -2;
      } else {
        succ[q][a] = intern(t1, t2);
      }
    }
  }

  const bool has_trap = trap_id != -1;
  int n = static_cast<int>(pf.pairs.size()) + (has_trap ? 1 : 0);
  out.initial = 0;
  out.trap = has_trap ? n - 1 : -1;
  out.succ.assign(n, std::vector<int>(num_assignments, 0));
  for (std::size_t q = 0; q < succ.size(); ++q) {
    for (std::uint32_t a = 0; a < num_assignments; ++a)
      out.succ[q][a] = succ[q][a] == -2 ? out.trap : succ[q][a];
  }
  if (has_trap) {
    out.labels.push_back("false");
    out.label_asts.push_back(make_false());
    out.accepting.push_back(false);
    pf.pairs.emplace_back(-1, -1);
    for (std::uint32_t a = 0; a < num_assignments; ++a) out.succ[out.trap][a] = out.trap;
  }

  out.edges.resize(n);
  for (int q = 0; q < n; ++q) {
    std::map<int, Guard> by_succ;
    for (std::uint32_t a = 0; a < num_assignments; ++a) {
      Guard& g = by_succ[out.succ[q][a]];
      g.alphabet_size = static_cast<int>(alphabet.size());
      g.sats.push_back(a);
    }
    for (auto& [to, g] : by_succ) out.edges[q].emplace_back(to, std::move(g));
  }
  return pf;
}

bool accepts(const Fsa& fsa, const Trace& trace) {
  int q = fsa.initial;
  for (const auto& s : trace) q = fsa.step(q, s);
  return fsa.is_accepting(q);
}

// ---------------------------------------------------------------------------
// Output formats

std::string to_dot(const Fsa& fsa) {
  std::ostringstream out;
  out << "digraph fsa {\n  rankdir=LR;\n  node [shape=circle];\n";
  out << "  __start [shape=point];\n";
  for (int q = 0; q < fsa.num_states(); ++q) {
    out << "  q" << q << " [label=\"" << fsa.labels[q] << "\"";
    if (fsa.accepting[q]) out << ", shape=doublecircle";
    out << "];\n";
  }
  out << "  __start -> q" << fsa.initial << ";\n";
  for (int q = 0; q < fsa.num_states(); ++q) {
    for (const auto& [to, guard] : fsa.edges[q]) {
      out << "  q" << q << " -> q" << to << " [label=\""
          << guard.text(fsa.alphabet) << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

namespace {

nlohmann::json predicate_to_json(const Predicate& p) {
  return {{"coeffs", p.coeffs},
          {"threshold", p.threshold},
          {"cmp", p.cmp == Cmp::Less ? "<" : ">"}};
}

Predicate predicate_from_json(const nlohmann::json& j) {
  Predicate p;
  p.coeffs = j.at("coeffs").get<std::map<std::string, double>>();
  p.threshold = j.at("threshold").get<double>();
  p.cmp = j.at("cmp").get<std::string>() == "<" ? Cmp::Less : Cmp::Greater;
  return p;
}

}  // namespace

std::string fsa_to_json(const Fsa& fsa) {
  nlohmann::json j;
  j["alphabet"] = nlohmann::json::array();
  for (const auto& p : fsa.alphabet) j["alphabet"].push_back(predicate_to_json(p));
  j["states"] = nlohmann::json::array();
  for (int q = 0; q < fsa.num_states(); ++q) {
    j["states"].push_back({{"index", q},
                           {"label", fsa.labels[q]},
                           {"accepting", static_cast<bool>(fsa.accepting[q])},
                           {"trap", q == fsa.trap}});
  }
  j["initial"] = fsa.initial;
  j["edges"] = nlohmann::json::array();
  for (int q = 0; q < fsa.num_states(); ++q) {
    for (const auto& [to, guard] : fsa.edges[q]) {
      j["edges"].push_back({{"from", q},
                            {"to", to},
                            {"sats", guard.sats},
                            {"guard", guard.text(fsa.alphabet)}});
    }
  }
  return j.dump(2);
}

Fsa fsa_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  Fsa fsa;
  for (const auto& pj : j.at("alphabet")) fsa.alphabet.push_back(predicate_from_json(pj));
  std::set<std::string> features;
  for (const auto& p : fsa.alphabet)
    for (const auto& [name, c] : p.coeffs) features.insert(name);
  const std::uint32_t num_assignments = 1u << fsa.alphabet.size();
  int n = static_cast<int>(j.at("states").size());
  fsa.labels.resize(n);
  fsa.label_asts.resize(n);
  fsa.accepting.assign(n, false);
  fsa.trap = -1;
  for (const auto& sj : j.at("states")) {
    int q = sj.at("index").get<int>();
    fsa.labels[q] = sj.at("label").get<std::string>();
    fsa.accepting[q] = sj.at("accepting").get<bool>();
    if (sj.at("trap").get<bool>()) fsa.trap = q;
    if (fsa.labels[q] == "true")
      fsa.label_asts[q] = make_true();
    else if (fsa.labels[q] == "false")
      fsa.label_asts[q] = make_false();
    else
      fsa.label_asts[q] = parse_formula(fsa.labels[q], features);
  }
  fsa.initial = j.at("initial").get<int>();
  fsa.edges.resize(n);
  fsa.succ.assign(n, std::vector<int>(num_assignments, -1));
  for (const auto& ej : j.at("edges")) {
    Guard g;
    g.alphabet_size = static_cast<int>(fsa.alphabet.size());
    g.sats = ej.at("sats").get<std::vector<std::uint32_t>>();
    int from = ej.at("from").get<int>();
    int to = ej.at("to").get<int>();
    for (std::uint32_t a : g.sats) fsa.succ[from][a] = to;
    fsa.edges[from].emplace_back(to, std::move(g));
  }
  for (int q = 0; q < n; ++q) {
    for (std::uint32_t a = 0; a < num_assignments; ++a) {
      if (fsa.succ[q][a] == -1)
        throw std::invalid_argument("automaton JSON is not complete");
    }
  }
  return fsa;
}

}  // namespace tlc
