#include "tlc/logic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tlc {

double Predicate::value(const StateSample& s) const {
  double v = 0.0;
  for (const auto& [name, coeff] : coeffs) {
    auto it = s.find(name);
    if (it == s.end())
      throw std::runtime_error("missing feature '" + name + "' in sample");
    v += coeff * it->second;
  }
  return v;
}

double Predicate::robustness(const StateSample& s) const {
  double f = value(s);
  return cmp == Cmp::Less ? threshold - f : f - threshold;
}

namespace {

std::string format_number(double v) {
  if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string Predicate::text() const {
  std::string out;
  bool first = true;
  for (const auto& [name, coeff] : coeffs) {
    if (coeff == 0.0) continue;
    if (first) {
      if (coeff == 1.0)
        out += name;
      else if (coeff == -1.0)
        out += "-" + name;
      else
        out += format_number(coeff) + "*" + name;
      first = false;
    } else {
      double a = std::abs(coeff);
      out += coeff < 0 ? " - " : " + ";
      out += a == 1.0 ? name : format_number(a) + "*" + name;
    }
  }
  out += cmp == Cmp::Less ? " < " : " > ";
  out += format_number(threshold);
  return out;
}

Formula make_true() {
  static const Formula t = std::make_shared<FormulaNode>(FormulaNode{NodeKind::True, {}, {}});
  return t;
}

Formula make_false() {
  static const Formula f = std::make_shared<FormulaNode>(FormulaNode{NodeKind::False, {}, {}});
  return f;
}

Formula make_pred(Predicate p) {
  return std::make_shared<FormulaNode>(FormulaNode{NodeKind::Pred, std::move(p), {}});
}

Formula make_not(Formula pred_child) {
  if (pred_child->kind != NodeKind::Pred)
    throw std::logic_error("Not node requires a predicate child");
  return std::make_shared<FormulaNode>(FormulaNode{NodeKind::Not, {}, {std::move(pred_child)}});
}

Formula make_and(std::vector<Formula> kids) {
  return std::make_shared<FormulaNode>(FormulaNode{NodeKind::And, {}, std::move(kids)});
}

Formula make_or(std::vector<Formula> kids) {
  return std::make_shared<FormulaNode>(FormulaNode{NodeKind::Or, {}, std::move(kids)});
}

Formula make_eventually(Formula child) {
  return std::make_shared<FormulaNode>(FormulaNode{NodeKind::Eventually, {}, {std::move(child)}});
}

Formula make_next(Formula child) {
  return std::make_shared<FormulaNode>(FormulaNode{NodeKind::Next, {}, {std::move(child)}});
}

Formula make_until(Formula left, Formula right) {
  return std::make_shared<FormulaNode>(
      FormulaNode{NodeKind::Until, {}, {std::move(left), std::move(right)}});
}

Formula make_then(Formula left, Formula right) {
  return std::make_shared<FormulaNode>(
      FormulaNode{NodeKind::Then, {}, {std::move(left), std::move(right)}});
}

Formula then_equivalence(Formula left, Formula right) {
  return make_eventually(make_and(
      {std::move(left), make_next(make_eventually(std::move(right)))}));
}

bool is_true(const Formula& f) { return f->kind == NodeKind::True; }
bool is_false(const Formula& f) { return f->kind == NodeKind::False; }

// ---------------------------------------------------------------------------
// Printing

namespace {

bool is_atomic(const Formula& f) {
  switch (f->kind) {
    case NodeKind::True:
    case NodeKind::False:
    case NodeKind::Pred:
      return true;
    default:
      return false;
  }
}

std::string print_child(const Formula& f) {
  if (is_atomic(f) && f->kind != NodeKind::Pred) return print_formula(f);
  return "(" + print_formula(f) + ")";
}

}  // namespace

std::string print_formula(const Formula& f) {
  switch (f->kind) {
    case NodeKind::True:
      return "true";
    case NodeKind::False:
      return "false";
    case NodeKind::Pred:
      return f->pred.text();
    case NodeKind::Not:
      return "!(" + print_formula(f->kids[0]) + ")";
    case NodeKind::And:
    case NodeKind::Or: {
      const char* sep = f->kind == NodeKind::And ? " & " : " | ";
      std::string out;
      for (std::size_t i = 0; i < f->kids.size(); ++i) {
        if (i) out += sep;
        out += print_child(f->kids[i]);
      }
      return out;
    }
    case NodeKind::Eventually:
      return "F " + print_child(f->kids[0]);
    case NodeKind::Next:
      return "X " + print_child(f->kids[0]);
    case NodeKind::Until:
      return print_child(f->kids[0]) + " U " + print_child(f->kids[1]);
    case NodeKind::Then:
      return print_child(f->kids[0]) + " T " + print_child(f->kids[1]);
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Canonicalization
//
// Residual formulas are normalized into a DNF over "units" (predicates,
// predicate negations, and temporal subformulas) with complement clash
// detection and cube subsumption. Progression keeps producing residuals
// over the same finite unit set, so this keeps the automaton state space
// from growing with syntactic noise.

namespace {

// A cube is a conjunction of units, keyed and sorted by canonical print.
using Cube = std::vector<std::pair<std::string, Formula>>;
using Dnf = std::vector<Cube>;  // disjunction of cubes

std::string negated_key(const Formula& unit) {
  if (unit->kind == NodeKind::Pred) return "!(" + unit->pred.text() + ")";
  if (unit->kind == NodeKind::Not) return unit->kids[0]->pred.text();
  return {};
}

// Merge two cubes; nullopt when a predicate and its negation clash.
bool cube_merge(const Cube& a, const Cube& b, Cube& out) {
  out.clear();
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out),
             [](const auto& x, const auto& y) { return x.first < y.first; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const auto& x, const auto& y) {
                          return x.first == y.first;
                        }),
            out.end());
  for (const auto& [key, unit] : out) {
    std::string neg = negated_key(unit);
    if (neg.empty()) continue;
    if (std::any_of(out.begin(), out.end(),
                    [&](const auto& u) { return u.first == neg; }))
      return false;
  }
  return true;
}

bool cube_subsumes(const Cube& small, const Cube& big) {
  // small implies big-cube? a cube with fewer units covers more models
  return std::includes(big.begin(), big.end(), small.begin(), small.end(),
                       [](const auto& x, const auto& y) { return x.first < y.first; });
}

Dnf to_dnf(const Formula& f) {
  switch (f->kind) {
    case NodeKind::True:
      return {Cube{}};
    case NodeKind::False:
      return {};
    case NodeKind::And: {
      Dnf acc{Cube{}};
      for (const auto& k : f->kids) {
        Dnf kid = to_dnf(k);
        Dnf next;
        for (const auto& a : acc) {
          for (const auto& b : kid) {
            Cube merged;
            if (cube_merge(a, b, merged)) next.push_back(std::move(merged));
          }
        }
        acc = std::move(next);
        if (acc.empty()) break;
      }
      return acc;
    }
    case NodeKind::Or: {
      Dnf acc;
      for (const auto& k : f->kids) {
        Dnf kid = to_dnf(k);
        acc.insert(acc.end(), kid.begin(), kid.end());
      }
      return acc;
    }
    default:
      return {Cube{{print_formula(f), f}}};
  }
}

Formula from_dnf(Dnf dnf) {
  // drop duplicate and subsumed cubes
  std::sort(dnf.begin(), dnf.end(), [](const Cube& a, const Cube& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  Dnf kept;
  for (auto& cube : dnf) {
    bool subsumed = std::any_of(kept.begin(), kept.end(), [&](const Cube& k) {
      return cube_subsumes(k, cube);
    });
    if (!subsumed) kept.push_back(std::move(cube));
  }
  if (kept.empty()) return make_false();
  std::vector<std::pair<std::string, Formula>> terms;
  for (const auto& cube : kept) {
    if (cube.empty()) return make_true();
    Formula term;
    if (cube.size() == 1) {
      term = cube[0].second;
    } else {
      std::vector<Formula> units;
      for (const auto& [key, u] : cube) units.push_back(u);
      term = make_and(std::move(units));
    }
    terms.emplace_back(print_formula(term), term);
  }
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (terms.size() == 1) return terms[0].second;
  std::vector<Formula> kids;
  for (auto& [key, t] : terms) kids.push_back(t);
  return make_or(std::move(kids));
}

}  // namespace

Formula canonicalize(const Formula& f) {
  switch (f->kind) {
    case NodeKind::True:
    case NodeKind::False:
    case NodeKind::Pred:
    case NodeKind::Not:
      return f;
    case NodeKind::And:
    case NodeKind::Or: {
      std::vector<Formula> kids;
      kids.reserve(f->kids.size());
      for (const auto& k : f->kids) kids.push_back(canonicalize(k));
      Formula boolean = f->kind == NodeKind::And ? make_and(std::move(kids))
                                                 : make_or(std::move(kids));
      return from_dnf(to_dnf(boolean));
    }
    case NodeKind::Eventually: {
      // F true is NOT collapsed to true: as a progression residual it means
      // "at least one more sample exists", which the empty suffix violates.
      Formula c = canonicalize(f->kids[0]);
      if (is_false(c)) return c;
      return make_eventually(c);
    }
    case NodeKind::Next:
      return make_next(canonicalize(f->kids[0]));
    case NodeKind::Until: {
      Formula l = canonicalize(f->kids[0]);
      Formula r = canonicalize(f->kids[1]);
      if (is_true(r)) return make_true();
      if (is_false(r)) return make_false();
      if (is_true(l)) return make_eventually(r);
      if (is_false(l)) return r;  // only the empty prefix remains
      return make_until(l, r);
    }
    case NodeKind::Then:
      return canonicalize(then_equivalence(f->kids[0], f->kids[1]));
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Alphabet

namespace {

void collect_alphabet_rec(const Formula& f, std::vector<Predicate>& out,
                          std::set<std::string>& seen) {
  if (f->kind == NodeKind::Pred) {
    std::string key = f->pred.text();
    if (seen.insert(key).second) out.push_back(f->pred);
    return;
  }
  for (const auto& k : f->kids) collect_alphabet_rec(k, out, seen);
}

}  // namespace

std::vector<Predicate> collect_alphabet(const Formula& f) {
  std::vector<Predicate> out;
  std::set<std::string> seen;
  collect_alphabet_rec(f, out, seen);
  return out;
}

// ---------------------------------------------------------------------------
// Robustness

double predicate_robustness(const StateSample& s, const Predicate& p) {
  return p.robustness(s);
}

double robustness(const Trace& trace, const Formula& f, std::size_t t) {
  if (trace.empty()) throw std::invalid_argument("empty trace");
  if (t >= trace.size()) throw std::out_of_range("start index past trace end");
  switch (f->kind) {
    case NodeKind::True:
      return kRhoMax;
    case NodeKind::False:
      return -kRhoMax;
    case NodeKind::Pred:
      return f->pred.robustness(trace[t]);
    case NodeKind::Not:
      return -robustness(trace, f->kids[0], t);
    case NodeKind::And: {
      double v = kRhoMax;
      for (const auto& k : f->kids) v = std::min(v, robustness(trace, k, t));
      return v;
    }
    case NodeKind::Or: {
      double v = -kRhoMax;
      for (const auto& k : f->kids) v = std::max(v, robustness(trace, k, t));
      return v;
    }
    case NodeKind::Eventually: {
      double v = -kRhoMax;
      for (std::size_t u = t; u < trace.size(); ++u)
        v = std::max(v, robustness(trace, f->kids[0], u));
      return v;
    }
    case NodeKind::Next:
      if (t + 1 >= trace.size()) return -kRhoMax;
      return robustness(trace, f->kids[0], t + 1);
    case NodeKind::Until: {
      double best = -kRhoMax;
      for (std::size_t u = t; u < trace.size(); ++u) {
        double v = robustness(trace, f->kids[1], u);
        for (std::size_t w = t; w < u; ++w)
          v = std::min(v, robustness(trace, f->kids[0], w));
        best = std::max(best, v);
      }
      return best;
    }
    case NodeKind::Then:
      return robustness(trace, then_equivalence(f->kids[0], f->kids[1]), t);
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok {
  End, LParen, RParen, AndOp, OrOp, NotOp, Implies,
  FOp, XOp, UOp, TOp, Less, Greater, Plus, Minus, Star,
  Number, Ident, TrueLit
};

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;
  double number = 0.0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return cur_; }

  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
    cur_.pos = i_;
    cur_.text.clear();
    if (i_ >= text_.size()) {
      cur_.kind = Tok::End;
      return;
    }
    char c = text_[i_];
    switch (c) {
      case '(': cur_.kind = Tok::LParen; ++i_; return;
      case ')': cur_.kind = Tok::RParen; ++i_; return;
      case '&': cur_.kind = Tok::AndOp; ++i_; return;
      case '|': cur_.kind = Tok::OrOp; ++i_; return;
      case '!': cur_.kind = Tok::NotOp; ++i_; return;
      case '<': cur_.kind = Tok::Less; ++i_; return;
      case '>': cur_.kind = Tok::Greater; ++i_; return;
      case '+': cur_.kind = Tok::Plus; ++i_; return;
      case '-': cur_.kind = Tok::Minus; ++i_; return;
      case '*': cur_.kind = Tok::Star; ++i_; return;
      case '=':
        if (i_ + 1 < text_.size() && text_[i_ + 1] == '>') {
          cur_.kind = Tok::Implies;
          i_ += 2;
          return;
        }
        throw ParseError(i_, "unexpected '='");
      default:
        break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = i_;
      while (end < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[end])) ||
              text_[end] == '.' || text_[end] == 'e' || text_[end] == 'E' ||
              ((text_[end] == '+' || text_[end] == '-') && end > i_ &&
               (text_[end - 1] == 'e' || text_[end - 1] == 'E')))) {
        ++end;
      }
      cur_.kind = Tok::Number;
      cur_.text = text_.substr(i_, end - i_);
      try {
        cur_.number = std::stod(cur_.text);
      } catch (const std::exception&) {
        throw ParseError(i_, "malformed number '" + cur_.text + "'");
      }
      i_ = end;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = i_;
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
        ++end;
      }
      std::string word = text_.substr(i_, end - i_);
      // F, X, U, T are operators; every other word is an identifier.
      if (word == "F") cur_.kind = Tok::FOp;
      else if (word == "X") cur_.kind = Tok::XOp;
      else if (word == "U") cur_.kind = Tok::UOp;
      else if (word == "T") cur_.kind = Tok::TOp;
      else if (word == "true") cur_.kind = Tok::TrueLit;
      else {
        cur_.kind = Tok::Ident;
        cur_.text = word;
      }
      i_ = end;
      return;
    }
    throw ParseError(i_, std::string("unexpected character '") + c + "'");
  }

  const std::string& text_;
  std::size_t i_ = 0;
  Token cur_;
};

/* Negation pushed to predicate level; negating true or a temporal
 * subformula has no scTLTL counterpart and is rejected. */
Formula negate_nnf(const Formula& f, std::size_t pos) {
  switch (f->kind) {
    case NodeKind::Pred:
      return make_not(f);
    case NodeKind::Not:
      return f->kids[0];
    case NodeKind::And: {
      std::vector<Formula> kids;
      for (const auto& k : f->kids) kids.push_back(negate_nnf(k, pos));
      return make_or(std::move(kids));
    }
    case NodeKind::Or: {
      std::vector<Formula> kids;
      for (const auto& k : f->kids) kids.push_back(negate_nnf(k, pos));
      return make_and(std::move(kids));
    }
    case NodeKind::True:
      throw ParseError(pos, "cannot negate 'true'");
    default:
      throw ParseError(pos,
                       "negation over a temporal operator is not expressible "
                       "without 'always'");
  }
}

class Parser {
 public:
  Parser(const std::string& text, const std::set<std::string>& features,
         const std::map<std::string, Formula>& macros)
      : lex_(text), features_(features), macros_(macros) {}

  Formula parse() {
    if (lex_.peek().kind == Tok::End) throw ParseError(0, "empty input");
    Formula f = parse_implies();
    expect(Tok::End, "end of input");
    return f;
  }

 private:
  Formula parse_implies() {
    Formula left = parse_until();
    if (lex_.peek().kind == Tok::Implies) {
      std::size_t pos = lex_.take().pos;
      Formula right = parse_implies();  // right-associative
      return make_or({negate_nnf(left, pos), right});
    }
    return left;
  }

  Formula parse_until() {
    Formula f = parse_or();
    while (lex_.peek().kind == Tok::UOp || lex_.peek().kind == Tok::TOp) {
      Tok op = lex_.take().kind;
      Formula rhs = parse_or();
      f = op == Tok::UOp ? make_until(f, rhs) : make_then(f, rhs);
    }
    return f;
  }

  Formula parse_or() {
    Formula f = parse_and();
    std::vector<Formula> kids{f};
    while (lex_.peek().kind == Tok::OrOp) {
      lex_.take();
      kids.push_back(parse_and());
    }
    return kids.size() == 1 ? kids[0] : make_or(std::move(kids));
  }

  Formula parse_and() {
    Formula f = parse_unary();
    std::vector<Formula> kids{f};
    while (lex_.peek().kind == Tok::AndOp) {
      lex_.take();
      kids.push_back(parse_unary());
    }
    return kids.size() == 1 ? kids[0] : make_and(std::move(kids));
  }

  Formula parse_unary() {
    switch (lex_.peek().kind) {
      case Tok::FOp:
        lex_.take();
        return make_eventually(parse_unary());
      case Tok::XOp:
        lex_.take();
        return make_next(parse_unary());
      case Tok::NotOp: {
        std::size_t pos = lex_.take().pos;
        return negate_nnf(parse_unary(), pos);
      }
      default:
        return parse_atom();
    }
  }

  Formula parse_atom() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::LParen: {
        lex_.take();
        Formula f = parse_implies();
        expect(Tok::RParen, "')'");
        return f;
      }
      case Tok::TrueLit:
        lex_.take();
        return make_true();
      case Tok::Ident: {
        // Either a macro reference or the start of a predicate.
        if (!is_predicate_ahead()) {
          Token id = take_tok();
          auto it = macros_.find(id.text);
          if (it != macros_.end()) return it->second;
          if (features_.count(id.text))
            throw ParseError(id.pos, "feature '" + id.text +
                                         "' used without a comparison");
          throw ParseError(id.pos, "unknown macro '" + id.text + "'");
        }
        return parse_predicate();
      }
      case Tok::Number:
      case Tok::Minus:
        return parse_predicate();
      case Tok::End:
        throw ParseError(t.pos, "unexpected end of input");
      default:
        throw ParseError(t.pos, "expected formula atom");
    }
  }

  /* Lone ident = macro; ident followed by a comparison or arithmetic
   * operator starts a predicate. */
  bool is_predicate_ahead() {
    Token id = lex_.take();
    Tok next = lex_.peek().kind;
    pushback_ = id;
    has_pushback_ = true;
    return next == Tok::Less || next == Tok::Greater || next == Tok::Plus ||
           next == Tok::Minus || next == Tok::Star;
  }

  Formula parse_predicate() {
    Predicate p;
    parse_term(p, /*negated=*/false);
    while (peek_tok() == Tok::Plus || peek_tok() == Tok::Minus) {
      bool neg = take_tok().kind == Tok::Minus;
      parse_term(p, neg);
    }
    Tok cmp = peek_tok();
    if (cmp != Tok::Less && cmp != Tok::Greater)
      throw ParseError(peek().pos, "expected '<' or '>' in predicate");
    take_tok();
    p.cmp = cmp == Tok::Less ? Cmp::Less : Cmp::Greater;
    bool neg_rhs = false;
    if (peek_tok() == Tok::Minus) {
      take_tok();
      neg_rhs = true;
    }
    if (peek_tok() != Tok::Number)
      throw ParseError(peek().pos, "expected threshold number");
    p.threshold = take_tok().number * (neg_rhs ? -1.0 : 1.0);
    bool nonzero = false;
    for (auto& [name, c] : p.coeffs) nonzero |= c != 0.0;
    if (!nonzero) throw ParseError(peek().pos, "predicate has no nonzero coefficient");
    return make_pred(std::move(p));
  }

  void parse_term(Predicate& p, bool negated) {
    double coeff = 1.0;
    if (peek_tok() == Tok::Minus) {
      take_tok();
      coeff = -1.0;
    }
    if (peek_tok() == Tok::Number) {
      coeff *= take_tok().number;
      if (peek_tok() != Tok::Star)
        throw ParseError(peek().pos, "expected '*' after coefficient");
      take_tok();
    }
    if (peek_tok() != Tok::Ident)
      throw ParseError(peek().pos, "expected feature name");
    Token id = take_tok();
    if (!features_.count(id.text))
      throw ParseError(id.pos, "unknown feature '" + id.text + "'");
    p.coeffs[id.text] += negated ? -coeff : coeff;
  }

  const Token& peek() {
    return has_pushback_ ? pushback_ : lex_.peek();
  }

  Tok peek_tok() { return peek().kind; }

  Token take_tok() {
    if (has_pushback_) {
      has_pushback_ = false;
      return pushback_;
    }
    return lex_.take();
  }

  void expect(Tok kind, const std::string& what) {
    if (peek_tok() != kind)
      throw ParseError(peek().pos, "expected " + what);
    take_tok();
  }

  Lexer lex_;
  const std::set<std::string>& features_;
  const std::map<std::string, Formula>& macros_;
  Token pushback_;
  bool has_pushback_ = false;
};

}  // namespace

Formula parse_formula(const std::string& text,
                      const std::set<std::string>& features,
                      const std::map<std::string, Formula>& macros) {
  Parser parser(text, features, macros);
  return parser.parse();
}

}  // namespace tlc
