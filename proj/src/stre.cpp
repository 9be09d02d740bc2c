#include "dcl/stre.hpp"

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dcl {

bool operator==(const ContextEntry& a, const ContextEntry& b) {
  if (a.hole != b.hole) return false;
  return a.hole || a.expr == b.expr;
}

bool operator==(const ContextExpr& a, const ContextExpr& b) {
  return a.letter == b.letter && a.entries == b.entries;
}

bool operator==(const PreProduct& a, const PreProduct& b) {
  return a.kind == b.kind && a.letter == b.letter && a.children == b.children &&
         a.contexts == b.contexts && a.body == b.body;
}

bool operator==(const Stre& a, const Stre& b) { return a.sum == b.sum; }

// ---------------------------------------------------------------- printing

namespace {

void print_stre(const Stre& s, std::string& out);

void print_ctx(const ContextExpr& c, std::string& out) {
  out += c.letter;
  out += '(';
  for (std::size_t i = 0; i < c.entries.size(); ++i) {
    if (i) out += ", ";
    if (c.entries[i].hole)
      out += '#';
    else
      print_stre(c.entries[i].expr, out);
  }
  out += ')';
}

void print_pre(const PreProduct& p, std::string& out) {
  if (p.kind == PreProduct::Kind::Optional) {
    out += p.letter;
    out += "?(";
    for (std::size_t i = 0; i < p.children.size(); ++i) {
      if (i) out += ", ";
      print_stre(p.children[i], out);
    }
    out += ')';
    return;
  }
  if (p.contexts.empty()) {
    out += '0';
  } else if (p.contexts.size() == 1) {
    out += '(';
    print_ctx(p.contexts[0], out);
    out += ')';
  } else {
    out += '{';
    for (std::size_t i = 0; i < p.contexts.size(); ++i) {
      if (i) out += " + ";
      print_ctx(p.contexts[i], out);
    }
    out += '}';
  }
  out += "*.";
  if (p.body.sum.size() == 1) {
    print_pre(p.body.sum[0], out);
  } else if (p.body.is_zero()) {
    out += '0';
  } else {
    out += '(';
    print_stre(p.body, out);
    out += ')';
  }
}

void print_stre(const Stre& s, std::string& out) {
  if (s.is_zero()) {
    out += '0';
    return;
  }
  for (std::size_t i = 0; i < s.sum.size(); ++i) {
    if (i) out += " + ";
    print_pre(s.sum[i], out);
  }
}

}  // namespace

std::string to_string(const Stre& s) {
  std::string out;
  print_stre(s, out);
  return out;
}

std::string to_string(const PreProduct& p) {
  std::string out;
  print_pre(p, out);
  return out;
}

// ----------------------------------------------------------------- parsing

namespace {

struct Tok {
  enum Kind { kName, kZero, kHole, kLPar, kRPar, kLBrace, kRBrace, kStar, kDot, kPlus, kComma, kQuery, kEnd };
  Kind kind;
  std::string text;
  std::size_t pos;
};

std::vector<Tok> lex_stre(const std::string& text) {
  std::vector<Tok> out;
  std::size_t i = 0;
  auto one = [&](Tok::Kind k) { out.push_back({k, text.substr(i, 1), i}); ++i; };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '0') {
      one(Tok::kZero);
    } else if (c == '#') {
      one(Tok::kHole);
    } else if (c == '(') {
      one(Tok::kLPar);
    } else if (c == ')') {
      one(Tok::kRPar);
    } else if (c == '{') {
      one(Tok::kLBrace);
    } else if (c == '}') {
      one(Tok::kRBrace);
    } else if (c == '*') {
      one(Tok::kStar);
    } else if (c == '.') {
      one(Tok::kDot);
    } else if (c == '+') {
      one(Tok::kPlus);
    } else if (c == ',') {
      one(Tok::kComma);
    } else if (c == '?') {
      one(Tok::kQuery);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' || text[j] == '\''))
        ++j;
      out.push_back({Tok::kName, text.substr(i, j - i), i});
      i = j;
    } else {
      throw ParseError("unexpected character '" + std::string(1, c) + "' at offset " +
                       std::to_string(i));
    }
  }
  out.push_back({Tok::kEnd, "", text.size()});
  return out;
}

struct StreParser {
  std::vector<Tok> ts;
  std::size_t i = 0;

  const Tok& peek(std::size_t ahead = 0) const {
    std::size_t j = i + ahead;
    return j < ts.size() ? ts[j] : ts.back();
  }
  bool at(Tok::Kind k) const { return peek().kind == k; }
  Tok take(Tok::Kind k, const char* what) {
    if (!at(k))
      throw ParseError(std::string("expected ") + what + " at offset " +
                       std::to_string(peek().pos));
    return ts[i++];
  }

  Stre parse_sum() {
    Stre s;
    if (at(Tok::kZero) && peek(1).kind != Tok::kStar) {
      ++i;
      return s;
    }
    s.sum.push_back(parse_pre());
    while (at(Tok::kPlus)) {
      ++i;
      s.sum.push_back(parse_pre());
    }
    return s;
  }

  PreProduct parse_pre() {
    PreProduct p;
    if (at(Tok::kName)) {
      p.kind = PreProduct::Kind::Optional;
      p.letter = ts[i++].text;
      take(Tok::kQuery, "'?'");
      take(Tok::kLPar, "'('");
      if (!at(Tok::kRPar)) {
        p.children.push_back(parse_sum());
        while (at(Tok::kComma)) {
          ++i;
          p.children.push_back(parse_sum());
        }
      }
      take(Tok::kRPar, "')'");
      return p;
    }
    p.kind = PreProduct::Kind::Iterate;
    if (at(Tok::kZero)) {
      ++i;  // empty iterator
    } else if (at(Tok::kLPar)) {
      ++i;
      p.contexts.push_back(parse_ctx());
      take(Tok::kRPar, "')'");
    } else if (at(Tok::kLBrace)) {
      ++i;
      if (!at(Tok::kRBrace)) {
        p.contexts.push_back(parse_ctx());
        while (at(Tok::kPlus)) {
          ++i;
          p.contexts.push_back(parse_ctx());
        }
      }
      take(Tok::kRBrace, "'}'");
    } else {
      throw ParseError("expected an expression at offset " + std::to_string(peek().pos));
    }
    take(Tok::kStar, "'*'");
    take(Tok::kDot, "'.'");
    p.body = parse_body();
    return p;
  }

  ContextExpr parse_ctx() {
    ContextExpr c;
    c.letter = take(Tok::kName, "a letter").text;
    take(Tok::kLPar, "'('");
    if (!at(Tok::kRPar)) {
      c.entries.push_back(parse_entry());
      while (at(Tok::kComma)) {
        ++i;
        c.entries.push_back(parse_entry());
      }
    }
    take(Tok::kRPar, "')'");
    return c;
  }

  ContextEntry parse_entry() {
    ContextEntry e;
    if (at(Tok::kHole)) {
      ++i;
      e.hole = true;
      return e;
    }
    e.expr = parse_sum();
    return e;
  }

  // An iterate body is a single pre-product, 0, or a parenthesized sum.  A
  // leading '(' is a nested iterator when the matching ')' is followed by
  // '*', a grouped sum otherwise.
  Stre parse_body() {
    if (at(Tok::kZero) && peek(1).kind != Tok::kStar) {
      ++i;
      return Stre{};
    }
    if (at(Tok::kLPar)) {
      int depth = 0;
      std::size_t j = i;
      for (; j < ts.size() && ts[j].kind != Tok::kEnd; ++j) {
        if (ts[j].kind == Tok::kLPar || ts[j].kind == Tok::kLBrace) ++depth;
        if (ts[j].kind == Tok::kRPar || ts[j].kind == Tok::kRBrace) {
          if (--depth == 0) break;
        }
      }
      bool nested_iterate = j + 1 < ts.size() && ts[j + 1].kind == Tok::kStar;
      if (!nested_iterate) {
        ++i;
        Stre s = parse_sum();
        take(Tok::kRPar, "')'");
        return s;
      }
    }
    Stre s;
    s.sum.push_back(parse_pre());
    return s;
  }
};

}  // namespace

Stre parse_stre(const std::string& text) {
  StreParser p{lex_stre(text)};
  Stre s = p.parse_sum();
  if (!p.at(Tok::kEnd))
    throw ParseError("trailing input at offset " + std::to_string(p.peek().pos));
  return s;
}

// ---------------------------------------------------------------- alphabet

namespace {

void collect_letters(const Stre& s, RankedAlphabet& out);

void collect_letters(const ContextExpr& c, RankedAlphabet& out) {
  out.add(c.letter, static_cast<int>(c.entries.size()));
  for (const ContextEntry& e : c.entries)
    if (!e.hole) collect_letters(e.expr, out);
}

void collect_letters(const PreProduct& p, RankedAlphabet& out) {
  if (p.kind == PreProduct::Kind::Optional) {
    out.add(p.letter, static_cast<int>(p.children.size()));
    for (const Stre& c : p.children) collect_letters(c, out);
    return;
  }
  for (const ContextExpr& c : p.contexts) collect_letters(c, out);
  collect_letters(p.body, out);
}

void collect_letters(const Stre& s, RankedAlphabet& out) {
  for (const PreProduct& p : s.sum) collect_letters(p, out);
}

}  // namespace

RankedAlphabet stre_alphabet(const Stre& s) {
  RankedAlphabet out;
  collect_letters(s, out);
  return out;
}

// -------------------------------------------------------------- automata

namespace {

// Rule-set builder shared by the denotation and versatile-tree compilers.
// States come from subexpressions; sums and iteration contribute silent
// edges that get saturated into the letter rules at the end.  Rules keep a
// mask of which child slots were holes: a hole never blocks the embedding
// closure, while an ordinary child whose language is empty does.
struct AutomatonBuilder {
  struct PendingRule {
    Letter letter;
    std::vector<int> kids;
    int target;
    std::vector<char> hole;  // empty = no holes
  };

  Nfta a;
  std::vector<PendingRule> pend;
  std::vector<std::pair<int, int>> eps;  // (p, q): trees of p also count for q

  int fresh() { return a.add_state("q" + std::to_string(a.num_states())); }

  void rule(const Letter& l, std::vector<int> kids, int target, std::vector<char> hole = {}) {
    pend.push_back({l, std::move(kids), target, std::move(hole)});
  }

  std::vector<std::set<int>> closure() const {
    std::vector<std::set<int>> up(a.num_states());
    for (int q = 0; q < a.num_states(); ++q) up[q].insert(q);
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [p, q] : eps)
        for (int r : std::set<int>(up[q]))
          if (up[p].insert(r).second) changed = true;
    }
    return up;
  }

  void finish(int root, bool downward_close) {
    if (downward_close) {
      auto up = closure();
      std::vector<char> prod(static_cast<std::size_t>(a.num_states()), 0);
      auto mark = [&](int q, bool& changed) {
        for (int t : up[q])
          if (!prod[t]) {
            prod[t] = 1;
            changed = true;
          }
      };
      bool changed = true;
      while (changed) {
        changed = false;
        for (const PendingRule& r : pend) {
          bool fires = true, plain_ok = true, plain_any = false;
          for (std::size_t i = 0; i < r.kids.size(); ++i) {
            bool is_hole = i < r.hole.size() && r.hole[i];
            if (!prod[r.kids[i]]) {
              fires = false;
              if (!is_hole) plain_ok = false;
            } else if (!is_hole) {
              plain_any = true;
            }
          }
          // the rule builds a tree, or its embedded fragments survive the
          // closure because only holes are missing
          if (fires || (plain_ok && plain_any)) mark(r.target, changed);
        }
      }
      for (const PendingRule& r : pend) {
        bool plain_ok = true;
        for (std::size_t i = 0; i < r.kids.size(); ++i) {
          bool is_hole = i < r.hole.size() && r.hole[i];
          if (!is_hole && !prod[r.kids[i]]) plain_ok = false;
        }
        if (!plain_ok) continue;
        for (std::size_t i = 0; i < r.kids.size(); ++i) {
          bool is_hole = i < r.hole.size() && r.hole[i];
          if (!is_hole) eps.push_back({r.kids[i], r.target});
        }
      }
    }
    auto up = closure();
    std::map<Letter, std::set<std::pair<std::vector<int>, int>>> sat;
    for (const PendingRule& r : pend)
      for (int t : up[r.target]) sat[r.letter].insert({r.kids, t});
    for (const auto& [l, rs] : sat)
      for (const auto& [kids, q] : rs) a.add_rule(l, kids, q);
    a.final_states = {root};
    a.validate();
  }
};

// Compiles denotations.  `hole` is empty for plain expressions; when set,
// holes become that rank-0 letter so context languages can be compared.
struct StreCompiler {
  AutomatonBuilder b;
  std::map<std::string, int> memo;
  Letter hole;
  int hole_state = -1;

  int state_of(const Stre& s) {
    std::string key = "S" + to_string(s);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    int q = b.fresh();
    memo.emplace(key, q);
    for (const PreProduct& p : s.sum) b.eps.push_back({state_of(p), q});
    return q;
  }

  int state_of(const PreProduct& p) {
    std::string key = "P" + to_string(p);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    int q = b.fresh();
    memo.emplace(key, q);
    if (p.kind == PreProduct::Kind::Optional) {
      std::vector<int> kids;
      for (const Stre& c : p.children) kids.push_back(state_of(c));
      b.rule(p.letter, kids, q);
      return q;
    }
    // fixpoint: the body finishes an iteration, each context re-enters it
    b.eps.push_back({state_of(p.body), q});
    for (const ContextExpr& c : p.contexts) {
      std::vector<int> kids;
      std::vector<char> mask;
      for (const ContextEntry& e : c.entries) {
        kids.push_back(e.hole ? q : state_of(e.expr));
        mask.push_back(e.hole ? 1 : 0);
      }
      b.rule(c.letter, kids, q, mask);
    }
    return q;
  }

  int state_of_hole() {
    if (hole_state < 0) {
      hole_state = b.fresh();
      b.rule(hole, {}, hole_state);
    }
    return hole_state;
  }

  int state_of(const ContextExpr& c) {
    // here the hole is a real leaf letter, so no mask is needed
    std::vector<int> kids;
    for (const ContextEntry& e : c.entries)
      kids.push_back(e.hole ? state_of_hole() : state_of(e.expr));
    int q = b.fresh();
    b.rule(c.letter, kids, q);
    return q;
  }
};

Letter fresh_hole_letter(const RankedAlphabet& sigma) {
  Letter h = "hole";
  while (sigma.contains(h)) h += '\'';
  return h;
}

Nfta compile_stre(const Stre& s) {
  StreCompiler c;
  c.b.a.alphabet = stre_alphabet(s);
  int root = c.state_of(s);
  c.b.finish(root, /*downward_close=*/true);
  return c.b.a;
}

Nfta compile_context(const ContextExpr& ctx, const RankedAlphabet& ambient, const Letter& hole) {
  StreCompiler c;
  c.b.a.alphabet = ambient;
  Stre wrap;  // only for letter collection
  PreProduct it;
  it.kind = PreProduct::Kind::Iterate;
  it.contexts = {ctx};
  wrap.sum.push_back(it);
  collect_letters(wrap, c.b.a.alphabet);
  c.b.a.alphabet.add(hole, 0);
  c.hole = hole;
  int root = c.state_of(ctx);
  c.b.finish(root, /*downward_close=*/true);
  return c.b.a;
}

}  // namespace

Nfta to_nfta(const Stre& s) { return compile_stre(s); }

bool member(const Tree& t, const Stre& s) { return member(to_nfta(s), t); }

bool stre_includes(const Stre& s1, const Stre& s2) {
  return includes(to_nfta(s2), to_nfta(s1));
}

// ---------------------------------------------------------------- rewriting

namespace {

Stre single(PreProduct p) {
  Stre s;
  s.sum.push_back(std::move(p));
  return s;
}

bool context_full(const ContextExpr& c) {
  if (c.entries.empty()) return false;
  return std::all_of(c.entries.begin(), c.entries.end(),
                     [](const ContextEntry& e) { return e.hole; });
}

bool context_hole_free(const ContextExpr& c) {
  return std::none_of(c.entries.begin(), c.entries.end(),
                      [](const ContextEntry& e) { return e.hole; });
}

std::size_t context_holes(const ContextExpr& c) {
  std::size_t n = 0;
  for (const ContextEntry& e : c.entries) n += e.hole;
  return n;
}

bool iterator_linear(const std::vector<ContextExpr>& cs) {
  return std::all_of(cs.begin(), cs.end(),
                     [](const ContextExpr& c) { return context_holes(c) <= 1; });
}

Stre split_rest(const Stre& s) {
  Stre rest;
  rest.sum.assign(s.sum.begin() + 1, s.sum.end());
  return rest;
}

std::optional<Stre> struct_step_sum(const Stre& s);

// One structural step below or at a pre-product; the result replaces the
// pre-product inside its sum.
std::optional<Stre> struct_step_pre(const PreProduct& p) {
  if (p.kind == PreProduct::Kind::Optional) {
    for (std::size_t i = 0; i < p.children.size(); ++i)
      if (auto r = struct_step_sum(p.children[i])) {
        PreProduct q = p;
        q.children[i] = *r;
        return single(std::move(q));
      }
    // a zero child kills the whole letter expression
    for (const Stre& c : p.children)
      if (c.is_zero()) return Stre{};
    // distribute a sum out of a child slot
    for (std::size_t i = 0; i < p.children.size(); ++i)
      if (p.children[i].sum.size() >= 2) {
        PreProduct q1 = p, q2 = p;
        q1.children[i] = single(p.children[i].sum[0]);
        q2.children[i] = split_rest(p.children[i]);
        Stre out;
        out.sum = {std::move(q1), std::move(q2)};
        return out;
      }
    return std::nullopt;
  }

  for (std::size_t ci = 0; ci < p.contexts.size(); ++ci)
    for (std::size_t ei = 0; ei < p.contexts[ci].entries.size(); ++ei) {
      const ContextEntry& e = p.contexts[ci].entries[ei];
      if (e.hole) continue;
      if (auto r = struct_step_sum(e.expr)) {
        PreProduct q = p;
        q.contexts[ci].entries[ei].expr = *r;
        return single(std::move(q));
      }
    }
  if (auto r = struct_step_sum(p.body)) {
    PreProduct q = p;
    q.body = *r;
    return single(std::move(q));
  }
  // an empty iterator runs zero times
  if (p.contexts.empty()) return p.body;
  // a context with an empty slot can never be instantiated
  for (std::size_t ci = 0; ci < p.contexts.size(); ++ci) {
    const ContextExpr& c = p.contexts[ci];
    bool dead = std::any_of(c.entries.begin(), c.entries.end(), [](const ContextEntry& e) {
      return !e.hole && e.expr.is_zero();
    });
    if (dead) {
      PreProduct q = p;
      q.contexts.erase(q.contexts.begin() + static_cast<std::ptrdiff_t>(ci));
      return single(std::move(q));
    }
  }
  // split a sum sitting in a context slot
  for (std::size_t ci = 0; ci < p.contexts.size(); ++ci)
    for (std::size_t ei = 0; ei < p.contexts[ci].entries.size(); ++ei) {
      const ContextEntry& e = p.contexts[ci].entries[ei];
      if (e.hole || e.expr.sum.size() < 2) continue;
      ContextExpr c1 = p.contexts[ci], c2 = p.contexts[ci];
      c1.entries[ei].expr = single(e.expr.sum[0]);
      c2.entries[ei].expr = split_rest(e.expr);
      PreProduct q = p;
      q.contexts[ci] = std::move(c1);
      q.contexts.insert(q.contexts.begin() + static_cast<std::ptrdiff_t>(ci) + 1,
                        std::move(c2));
      return single(std::move(q));
    }
  // a hole-free context is used at most once: move it into the body
  for (std::size_t ci = 0; ci < p.contexts.size(); ++ci) {
    if (!context_hole_free(p.contexts[ci])) continue;
    PreProduct opt;
    opt.kind = PreProduct::Kind::Optional;
    opt.letter = p.contexts[ci].letter;
    for (const ContextEntry& e : p.contexts[ci].entries) opt.children.push_back(e.expr);
    PreProduct q = p;
    q.contexts.erase(q.contexts.begin() + static_cast<std::ptrdiff_t>(ci));
    q.body.sum.push_back(std::move(opt));
    return single(std::move(q));
  }
  // all-hole contexts over an empty body produce nothing
  if (p.body.is_zero() &&
      std::all_of(p.contexts.begin(), p.contexts.end(), context_full))
    return Stre{};
  // a linear iterator distributes over a body sum
  if (p.body.sum.size() >= 2 && iterator_linear(p.contexts)) {
    PreProduct q1 = p, q2 = p;
    q1.body = single(p.body.sum[0]);
    q2.body = split_rest(p.body);
    Stre out;
    out.sum = {std::move(q1), std::move(q2)};
    return out;
  }
  return std::nullopt;
}

std::optional<Stre> struct_step_sum(const Stre& s) {
  for (std::size_t i = 0; i < s.sum.size(); ++i)
    if (auto r = struct_step_pre(s.sum[i])) {
      Stre out;
      out.sum.assign(s.sum.begin(), s.sum.begin() + static_cast<std::ptrdiff_t>(i));
      out.sum.insert(out.sum.end(), r->sum.begin(), r->sum.end());
      out.sum.insert(out.sum.end(), s.sum.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                     s.sum.end());
      return out;
    }
  return std::nullopt;
}

// Inclusion checks behind the absorption steps, with automata cached per
// printed subexpression so repeated passes stay cheap.
struct AbsorbContext {
  RankedAlphabet sigma;  // of the whole expression under rewriting
  Letter hole;
  std::map<std::string, Nfta> cache;

  explicit AbsorbContext(const Stre& root) : sigma(stre_alphabet(root)) {
    hole = fresh_hole_letter(sigma);
  }

  const Nfta& automaton(const PreProduct& p) {
    std::string key = "P" + to_string(p);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, compile_stre(single(p))).first;
    return it->second;
  }

  const Nfta& automaton(const ContextExpr& c) {
    std::string key = "C" + to_string(single_ctx(c));
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, compile_context(c, sigma, hole)).first;
    return it->second;
  }

  static Stre single_ctx(const ContextExpr& c) {
    PreProduct p;
    p.kind = PreProduct::Kind::Iterate;
    p.contexts = {c};
    return single(std::move(p));
  }

  bool pre_included(const PreProduct& a, const PreProduct& b) {
    return includes(automaton(b), automaton(a));
  }
  bool ctx_included(const ContextExpr& a, const ContextExpr& b) {
    return includes(automaton(b), automaton(a));
  }
};

std::optional<Stre> absorb_step_sum(const Stre& s, AbsorbContext& cx);

std::optional<PreProduct> absorb_step_pre(const PreProduct& p, AbsorbContext& cx) {
  if (p.kind == PreProduct::Kind::Optional) {
    for (std::size_t i = 0; i < p.children.size(); ++i)
      if (auto r = absorb_step_sum(p.children[i], cx)) {
        PreProduct q = p;
        q.children[i] = *r;
        return q;
      }
    return std::nullopt;
  }
  for (std::size_t ci = 0; ci < p.contexts.size(); ++ci)
    for (std::size_t ei = 0; ei < p.contexts[ci].entries.size(); ++ei) {
      const ContextEntry& e = p.contexts[ci].entries[ei];
      if (e.hole) continue;
      if (auto r = absorb_step_sum(e.expr, cx)) {
        PreProduct q = p;
        q.contexts[ci].entries[ei].expr = *r;
        return q;
      }
    }
  if (auto r = absorb_step_sum(p.body, cx)) {
    PreProduct q = p;
    q.body = *r;
    return q;
  }
  // drop a context whose language another context covers
  for (std::size_t i = 0; i < p.contexts.size(); ++i)
    for (std::size_t j = 0; j < p.contexts.size(); ++j) {
      if (i == j) continue;
      if (cx.ctx_included(p.contexts[i], p.contexts[j])) {
        PreProduct q = p;
        q.contexts.erase(q.contexts.begin() + static_cast<std::ptrdiff_t>(i));
        return q;
      }
    }
  return std::nullopt;
}

std::optional<Stre> absorb_step_sum(const Stre& s, AbsorbContext& cx) {
  for (std::size_t i = 0; i < s.sum.size(); ++i)
    if (auto r = absorb_step_pre(s.sum[i], cx)) {
      Stre out = s;
      out.sum[i] = *r;
      return out;
    }
  // drop a summand another summand covers
  for (std::size_t i = 0; i < s.sum.size(); ++i)
    for (std::size_t j = 0; j < s.sum.size(); ++j) {
      if (i == j) continue;
      if (cx.pre_included(s.sum[i], s.sum[j])) {
        Stre out = s;
        out.sum.erase(out.sum.begin() + static_cast<std::ptrdiff_t>(i));
        return out;
      }
    }
  return std::nullopt;
}

}  // namespace

std::optional<Stre> rewrite_step(const Stre& s) {
  if (auto r = struct_step_sum(s)) return r;
  AbsorbContext cx(s);
  return absorb_step_sum(s, cx);
}

Stre normalize(const Stre& s) {
  long budget = 1000000;
  auto spend = [&budget] {
    if (--budget < 0) throw Error("normalize: step budget exhausted");
  };
  Stre cur = s;
  while (auto r = struct_step_sum(cur)) {
    spend();
    cur = std::move(*r);
  }
  AbsorbContext cx(cur);
  for (;;) {
    if (auto r = absorb_step_sum(cur, cx)) {
      spend();
      cur = std::move(*r);
      while (auto r2 = struct_step_sum(cur)) {
        spend();
        cur = std::move(*r2);
      }
      continue;
    }
    return cur;
  }
}

// ------------------------------------------------------------ pure products

namespace {

bool is_pure_child(const Stre& s) {
  return s.sum.size() == 1 && is_pure_product(s.sum[0]);
}

}  // namespace

bool is_pure_product(const PreProduct& p) {
  if (p.kind == PreProduct::Kind::Optional)
    return std::all_of(p.children.begin(), p.children.end(), is_pure_child);
  if (p.contexts.empty()) return false;
  for (const ContextExpr& c : p.contexts) {
    bool has_hole = false;
    for (const ContextEntry& e : c.entries) {
      if (e.hole)
        has_hole = true;
      else if (!is_pure_child(e.expr))
        return false;
    }
    if (!has_hole) return false;
  }
  return is_pure_child(p.body);
}

Letter pure_root(const PreProduct& p) {
  if (p.kind == PreProduct::Kind::Optional) return p.letter;
  if (p.contexts.empty()) throw Error("pure_root: iterate without contexts");
  return p.contexts.front().letter;
}

namespace {

PreProduct pureify(const PreProduct& p) {
  if (p.kind == PreProduct::Kind::Optional) {
    PreProduct out = p;
    for (std::size_t i = 0; i < out.children.size(); ++i)
      out.children[i] = single(pureify(p.children[i].sum.at(0)));
    return out;
  }
  PreProduct out;
  out.kind = PreProduct::Kind::Iterate;
  out.contexts = p.contexts;
  for (ContextExpr& c : out.contexts)
    for (ContextEntry& e : c.entries)
      if (!e.hole) e.expr = single(pureify(e.expr.sum.at(0)));

  std::vector<PreProduct> parts;
  for (const PreProduct& q : p.body.sum) parts.push_back(pureify(q));

  if (parts.size() == 1) {
    out.body = single(parts[0]);
    return out;
  }
  if (parts.empty()) {
    // empty body: finish with the first expression sitting in a context
    // slot instead (some context must have one, the iterator is not full)
    for (const ContextExpr& c : out.contexts)
      for (const ContextEntry& e : c.entries)
        if (!e.hole) {
          out.body = e.expr;
          return out;
        }
    throw Error("to_pure_product: empty body under a full iterator");
  }
  // several ways to finish: pack them into one tree below a context with
  // two or more holes, nesting previous packs into the first hole
  const ContextExpr* wide = nullptr;
  for (const ContextExpr& c : out.contexts)
    if (context_holes(c) >= 2) {
      wide = &c;
      break;
    }
  if (!wide) throw Error("to_pure_product: body sum under a linear iterator");
  PreProduct pack;
  pack.kind = PreProduct::Kind::Optional;
  pack.letter = wide->letter;
  for (const ContextEntry& e : wide->entries)
    pack.children.push_back(e.hole ? single(parts[0]) : e.expr);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    PreProduct next;
    next.kind = PreProduct::Kind::Optional;
    next.letter = wide->letter;
    bool first_hole = true;
    for (const ContextEntry& e : wide->entries) {
      if (!e.hole) {
        next.children.push_back(e.expr);
      } else if (first_hole) {
        first_hole = false;
        next.children.push_back(single(pack));
      } else {
        next.children.push_back(single(parts[i]));
      }
    }
    pack = std::move(next);
  }
  out.body = single(std::move(pack));
  return out;
}

}  // namespace

PreProduct to_pure_product(const PreProduct& p) {
  if (rewrite_step(single(p)))
    throw Error("to_pure_product: input is not in normal form");
  return pureify(p);
}

// ------------------------------------------------------------ diversification

namespace {

struct Marker {
  std::set<Letter> taken;
  std::map<Letter, int> next;
  std::map<Letter, Letter>* back;

  Letter mark(const Letter& a) {
    Letter m;
    do {
      m = a + "_" + std::to_string(++next[a]);
    } while (taken.count(m));
    taken.insert(m);
    (*back)[m] = a;
    return m;
  }

  void walk(PreProduct& p) {
    if (p.kind == PreProduct::Kind::Optional) {
      p.letter = mark(p.letter);
      for (Stre& c : p.children)
        for (PreProduct& q : c.sum) walk(q);
      return;
    }
    for (ContextExpr& c : p.contexts) {
      c.letter = mark(c.letter);
      for (ContextEntry& e : c.entries)
        if (!e.hole)
          for (PreProduct& q : e.expr.sum) walk(q);
    }
    for (PreProduct& q : p.body.sum) walk(q);
  }
};

}  // namespace

Diversified diversify(const PreProduct& pure) {
  if (!is_pure_product(pure)) throw Error("diversify: not a pure product");
  Diversified out;
  out.product = pure;
  Marker m;
  m.back = &out.original;
  RankedAlphabet sigma = stre_alphabet(single(pure));
  for (const auto& [a, r] : sigma.letters()) {
    (void)r;
    m.taken.insert(a);
  }
  m.walk(out.product);
  return out;
}

// ------------------------------------------------------------ versatile trees

namespace {

struct VersatileCompiler {
  AutomatonBuilder b;

  int state_of(const PreProduct& p) {
    if (p.kind == PreProduct::Kind::Optional) {
      std::vector<int> kids;
      for (const Stre& c : p.children) kids.push_back(state_of(c.sum.at(0)));
      int q = b.fresh();
      b.rule(p.letter, kids, q);
      return q;
    }
    // exit holds after a completed round: either finish with the body or
    // start another full round of contexts in listed order
    int exit = b.fresh();
    int body = state_of(p.body.sum.at(0));
    int next = exit;
    for (std::size_t i = p.contexts.size(); i-- > 0;) {
      const ContextExpr& c = p.contexts[i];
      std::vector<int> kids;
      for (const ContextEntry& e : c.entries)
        kids.push_back(e.hole ? next : state_of(e.expr.sum.at(0)));
      int q = b.fresh();
      b.rule(c.letter, kids, q);
      next = q;
    }
    b.eps.push_back({body, exit});
    b.eps.push_back({next, exit});
    return next;  // the first round is mandatory
  }
};

}  // namespace

Nfta versatile_nfta(const Diversified& d) {
  if (!is_pure_product(d.product)) throw Error("versatile_nfta: not a pure product");
  VersatileCompiler c;
  c.b.a.alphabet = stre_alphabet(single(d.product));
  int root = c.state_of(d.product);
  c.b.finish(root, /*downward_close=*/false);
  return c.b.a;
}

namespace {

Tree sample_tree(const PreProduct& p, int rounds) {
  if (p.kind == PreProduct::Kind::Optional) {
    std::vector<Tree> kids;
    for (const Stre& c : p.children) kids.push_back(sample_tree(c.sum.at(0), rounds));
    return Tree(p.letter, std::move(kids));
  }
  Tree t = sample_tree(p.body.sum.at(0), rounds);
  for (int r = std::max(rounds, 1); r-- > 0;) {
    Tree cont = std::move(t);
    for (std::size_t i = p.contexts.size(); i-- > 0;) {
      const ContextExpr& c = p.contexts[i];
      std::vector<Tree> kids;
      for (const ContextEntry& e : c.entries)
        kids.push_back(e.hole ? cont : sample_tree(e.expr.sum.at(0), rounds));
      cont = Tree(c.letter, std::move(kids));
    }
    t = std::move(cont);
  }
  return t;
}

}  // namespace

Tree versatile_sample(const Diversified& d, int rounds) {
  if (!is_pure_product(d.product)) throw Error("versatile_sample: not a pure product");
  return sample_tree(d.product, rounds);
}

// ---------------------------------------------------------------- largeness

namespace {

void collect_iterates(const PreProduct& p, std::vector<std::pair<Letter, Letter>>& out) {
  if (p.kind == PreProduct::Kind::Optional) {
    for (const Stre& c : p.children)
      for (const PreProduct& q : c.sum) collect_iterates(q, out);
    return;
  }
  out.push_back({pure_root(p), pure_root(p.body.sum.at(0))});
  for (const ContextExpr& c : p.contexts)
    for (const ContextEntry& e : c.entries)
      if (!e.hole)
        for (const PreProduct& q : e.expr.sum) collect_iterates(q, out);
  for (const PreProduct& q : p.body.sum) collect_iterates(q, out);
}

bool check_large(const Tree& t, const std::map<Letter, Letter>& want, int n,
                 std::map<Letter, int>& above) {
  auto it = want.find(t.label);
  if (it != want.end()) {
    auto cnt = above.find(it->second);
    if ((cnt == above.end() ? 0 : cnt->second) < n) return false;
  }
  ++above[t.label];
  bool ok = std::all_of(t.children.begin(), t.children.end(),
                        [&](const Tree& c) { return check_large(c, want, n, above); });
  --above[t.label];
  return ok;
}

}  // namespace

bool is_n_large_wrt(const Tree& t, const Diversified& d, int n) {
  if (!is_pure_product(d.product)) throw Error("is_n_large_wrt: not a pure product");
  if (n <= 0) return true;
  std::vector<std::pair<Letter, Letter>> iterates;
  collect_iterates(d.product, iterates);
  std::map<Letter, Letter> want;  // body root -> required ancestor label
  for (const auto& [anc, root] : iterates) want[root] = anc;
  std::map<Letter, int> above;
  return check_large(t, want, n, above);
}

std::set<Letter> iterate_roots(const PreProduct& pure) {
  if (!is_pure_product(pure)) throw Error("iterate_roots: not a pure product");
  std::vector<std::pair<Letter, Letter>> iterates;
  collect_iterates(pure, iterates);
  std::set<Letter> roots;
  for (const auto& [anc, root] : iterates) roots.insert(anc);
  return roots;
}

}  // namespace dcl
