#include "dcl/ftt.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <sstream>
#include <tuple>
#include <utility>

namespace dcl {

namespace {

void check_rhs(const FttRhs& v, int rank, bool any,
               const std::set<std::string>& states, const RankedAlphabet& out) {
  if (v.call) {
    if (!states.count(v.state))
      throw Error("rule output uses undeclared state " + v.state);
    if (!v.children.empty()) throw Error("state calls cannot have children");
    if (any) {
      if (v.var != 0) throw Error("any-rule output must use the variable x");
    } else if (v.var < 1 || v.var > rank) {
      throw Error("variable index out of range in rule output");
    }
    return;
  }
  if (!out.contains(v.letter))
    throw Error("rule output letter missing from output alphabet: " + v.letter);
  if (static_cast<int>(v.children.size()) != out.rank(v.letter))
    throw Error("rule output arity mismatch for " + v.letter);
  for (const FttRhs& c : v.children) check_rhs(c, rank, any, states, out);
}

void count_vars(const FttRhs& v, std::map<int, int>& uses) {
  if (v.call) {
    ++uses[v.var];
    return;
  }
  for (const FttRhs& c : v.children) count_vars(c, uses);
}

void print_rhs(const FttRhs& v, std::string& out) {
  if (v.call) {
    out += "(" + v.state + ",x";
    if (v.var > 0) out += std::to_string(v.var);
    out += ")";
    return;
  }
  out += v.letter;
  if (!v.children.empty()) {
    out += '(';
    for (std::size_t i = 0; i < v.children.size(); ++i) {
      if (i) out += ',';
      print_rhs(v.children[i], out);
    }
    out += ')';
  }
}

std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct RhsParser {
  const std::string& s;
  std::size_t i = 0;
  int lineno;

  void ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) throw ParseError(std::string("expected '") + c + "'", lineno);
  }
  std::string name() {
    ws();
    std::size_t b = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) ||
                            s[i] == '_' || s[i] == '\''))
      ++i;
    if (b == i) throw ParseError("expected a name", lineno);
    return s.substr(b, i - b);
  }
  int variable() {
    std::string x = name();
    if (x == "x") return 0;
    if (x.size() > 1 && x[0] == 'x' &&
        std::all_of(x.begin() + 1, x.end(),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      return std::stoi(x.substr(1));
    throw ParseError("variable must be x or xN, got " + x, lineno);
  }
  FttRhs parse() {
    ws();
    if (eat('(')) {
      FttRhs v;
      v.call = true;
      v.state = name();
      expect(',');
      v.var = variable();
      expect(')');
      return v;
    }
    FttRhs v;
    v.letter = name();
    if (eat('(')) {
      if (!eat(')')) {
        do v.children.push_back(parse());
        while (eat(','));
        expect(')');
      }
    }
    return v;
  }
};

void infer_output_letters(const FttRhs& v, RankedAlphabet& out, int lineno) {
  if (v.call) return;
  try {
    out.add(v.letter, static_cast<int>(v.children.size()));
  } catch (const Error& e) {
    throw ParseError(e.what(), lineno);
  }
  for (const FttRhs& c : v.children) infer_output_letters(c, out, lineno);
}

}  // namespace

void Ftt::validate() const {
  input.validate();
  output.validate();
  std::set<std::string> seen;
  for (const std::string& s : states)
    if (!seen.insert(s).second) throw Error("duplicate transducer state " + s);
  if (!seen.count(initial)) throw Error("initial state not declared: " + initial);
  for (const FttRule& r : rules) {
    if (!seen.count(r.state)) throw Error("rule uses undeclared state " + r.state);
    int rank = 0;
    if (!r.any) {
      if (!input.contains(r.letter))
        throw Error("rule letter missing from input alphabet: " + r.letter);
      rank = input.rank(r.letter);
    }
    check_rhs(r.rhs, rank, r.any, seen, output);
  }
}

bool is_linear(const Ftt& a) {
  for (const FttRule& r : a.rules) {
    std::map<int, int> uses;
    count_vars(r.rhs, uses);
    for (const auto& [var, n] : uses)
      if (n > 1) return false;
  }
  return true;
}

std::string to_string(const Ftt& a) {
  std::string out = "states";
  for (const std::string& s : a.states) out += " " + s;
  out += "\ninit " + a.initial + "\n";
  for (const FttRule& r : a.rules) {
    out += r.state + ", ";
    if (r.any) {
      out += "x";
    } else {
      out += r.letter;
      int rank = a.input.rank(r.letter);
      if (rank > 0) {
        out += '(';
        for (int i = 1; i <= rank; ++i) {
          if (i > 1) out += ',';
          out += "x" + std::to_string(i);
        }
        out += ')';
      }
    }
    out += " -> ";
    print_rhs(r.rhs, out);
    out += "\n";
  }
  return out;
}

Ftt parse_ftt(const std::string& text) {
  Ftt a;
  std::set<std::string> declared;
  bool have_init = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto cut = line.find("--");
    if (cut != std::string::npos) line.erase(cut);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "states") {
      std::string name;
      while (ls >> name) {
        if (!declared.insert(name).second)
          throw ParseError("duplicate state " + name, lineno);
        a.states.push_back(name);
      }
      continue;
    }
    if (first == "init") {
      if (!(ls >> a.initial)) throw ParseError("missing initial state", lineno);
      have_init = true;
      continue;
    }
    std::string rest;
    std::getline(ls, rest);
    std::string full = first + rest;
    auto comma = full.find(',');
    if (comma == std::string::npos)
      throw ParseError("expected ',' after the rule state", lineno);
    auto arrow = full.find("->", comma);
    if (arrow == std::string::npos) throw ParseError("expected '->'", lineno);
    FttRule rule;
    rule.state = trimmed(full.substr(0, comma));
    if (rule.state.empty()) throw ParseError("missing rule state", lineno);
    std::string lhs = trimmed(full.substr(comma + 1, arrow - comma - 1));
    if (lhs == "x") {
      rule.any = true;
    } else {
      Tree pat;
      try {
        pat = parse_tree(lhs);
      } catch (const Error& e) {
        throw ParseError(std::string("bad rule pattern: ") + e.what(), lineno);
      }
      rule.letter = pat.label;
      for (std::size_t i = 0; i < pat.children.size(); ++i) {
        if (!pat.children[i].children.empty() ||
            pat.children[i].label != "x" + std::to_string(i + 1))
          throw ParseError("pattern variables must be x1..xr in order", lineno);
      }
      try {
        a.input.add(pat.label, static_cast<int>(pat.children.size()));
      } catch (const Error& e) {
        throw ParseError(e.what(), lineno);
      }
    }
    std::string rhs_text = full.substr(arrow + 2);
    RhsParser rp{rhs_text, 0, lineno};
    rule.rhs = rp.parse();
    rp.ws();
    if (rp.i != rhs_text.size())
      throw ParseError("trailing input after the rule output", lineno);
    infer_output_letters(rule.rhs, a.output, lineno);
    a.rules.push_back(std::move(rule));
  }
  if (!have_init) throw ParseError("missing init line", lineno);
  a.validate();
  return a;
}

namespace {

// All instantiations of v of size <= bound, drawing call values from look.
void expand_rhs(const FttRhs& v,
                const std::function<const std::set<Tree>&(const std::string&, int)>& look,
                std::size_t bound, std::vector<Tree>& out) {
  out.clear();
  if (v.call) {
    const std::set<Tree>& opts = look(v.state, v.var);
    out.assign(opts.begin(), opts.end());
    return;
  }
  std::vector<Tree> acc{Tree(v.letter)};
  for (const FttRhs& c : v.children) {
    std::vector<Tree> opts;
    expand_rhs(c, look, bound, opts);
    std::vector<Tree> next;
    for (const Tree& base : acc)
      for (const Tree& o : opts) {
        Tree grown = base;
        grown.children.push_back(o);
        if (grown.size() <= bound) next.push_back(std::move(grown));
      }
    acc = std::move(next);
    if (acc.empty()) return;
  }
  out = std::move(acc);
}

}  // namespace

std::set<Tree> apply_to_tree(const Ftt& a, const Tree& t, std::size_t size_bound) {
  a.validate();
  std::vector<const Tree*> nodes;
  std::map<const Tree*, int> node_id;
  std::function<void(const Tree&)> walk = [&](const Tree& u) {
    for (const Tree& c : u.children) walk(c);
    node_id[&u] = static_cast<int>(nodes.size());
    nodes.push_back(&u);
  };
  walk(t);
  std::map<std::string, int> sid;
  for (std::size_t i = 0; i < a.states.size(); ++i)
    sid[a.states[i]] = static_cast<int>(i);
  // table[p][n]: outputs of the subtree at node n started in state p.  The
  // sets only grow and live in a finite universe, so iterating the rules to a
  // fixpoint terminates; any-rules may feed their own cell, hence the loop.
  std::vector<std::vector<std::set<Tree>>> table(
      a.states.size(), std::vector<std::set<Tree>>(nodes.size()));
  bool changed = true;
  while (changed) {
    changed = false;
    for (const FttRule& r : a.rules) {
      int p = sid.at(r.state);
      for (std::size_t n = 0; n < nodes.size(); ++n) {
        const Tree* u = nodes[n];
        if (!r.any &&
            (u->label != r.letter ||
             static_cast<int>(u->children.size()) != a.input.rank(r.letter)))
          continue;
        auto look = [&](const std::string& s, int var) -> const std::set<Tree>& {
          int q = sid.at(s);
          if (r.any) return table[q][n];
          return table[q][node_id.at(&u->children[var - 1])];
        };
        std::vector<Tree> outs;
        expand_rhs(r.rhs, look, size_bound, outs);
        for (Tree& o : outs)
          if (table[p][n].insert(std::move(o)).second) changed = true;
      }
    }
  }
  return table[sid.at(a.initial)][node_id.at(&t)];
}

namespace {

std::vector<char> productive_states(const Nfta& b) {
  std::vector<char> prod(b.num_states(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [l, rs] : b.rules)
      for (const auto& [kids, tgt] : rs) {
        if (prod[tgt]) continue;
        bool ok = std::all_of(kids.begin(), kids.end(),
                              [&](int k) { return prod[k] != 0; });
        if (ok) {
          prod[tgt] = 1;
          changed = true;
        }
      }
  }
  return prod;
}

void vars_used(const FttRhs& v, std::vector<char>& used) {
  if (v.call) {
    if (v.var >= 0 && v.var < static_cast<int>(used.size())) used[v.var] = 1;
    return;
  }
  for (const FttRhs& c : v.children) vars_used(c, used);
}

// Accumulates the image automaton: plain rules plus containment edges
// (sub, super) meaning L(sub) <= L(super), resolved by copying rules along
// the transitive closure at the end.
struct ImageBuilder {
  Nfta a;
  int piece_counter = 0;
  std::set<std::tuple<Letter, std::vector<int>, int>> rules;
  std::vector<std::pair<int, int>> eps;

  int fresh() { return a.add_state("t" + std::to_string(piece_counter++)); }

  // State recognizing the instantiations of v; calls resolve through pair_for.
  int build(const FttRhs& v, const std::function<int(const std::string&, int)>& pair_for) {
    if (v.call) return pair_for(v.state, v.var);
    std::vector<int> kids;
    for (const FttRhs& c : v.children) kids.push_back(build(c, pair_for));
    int s = fresh();
    rules.insert({v.letter, std::move(kids), s});
    return s;
  }

  Nfta finish(std::set<int> finals) {
    int n = a.num_states();
    std::vector<std::vector<int>> adj(n);
    for (const auto& [sub, super] : eps) adj[sub].push_back(super);
    std::vector<std::set<int>> reach(n);
    for (int s = 0; s < n; ++s) {
      std::vector<int> stack{s};
      while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int y : adj[x])
          if (reach[s].insert(y).second) stack.push_back(y);
      }
    }
    std::set<std::tuple<Letter, std::vector<int>, int>> all = rules;
    for (const auto& [l, kids, tgt] : rules)
      for (int up : reach[tgt]) all.insert({l, kids, up});
    for (const auto& [l, kids, tgt] : all) a.add_rule(l, kids, tgt);
    a.final_states = std::move(finals);
    a.validate();
    return std::move(a);
  }
};

}  // namespace

Nfta apply_to_nfta(const Ftt& a, const Nfta& b) {
  a.validate();
  b.validate();
  if (!is_linear(a)) throw Error("apply_to_nfta: transducer is not linear");
  std::vector<char> prod = productive_states(b);
  ImageBuilder ib;
  ib.a.alphabet = a.output;
  std::map<std::pair<std::string, int>, int> pair_id;
  auto pair_for = [&](const std::string& p, int q) {
    auto key = std::make_pair(p, q);
    auto it = pair_id.find(key);
    if (it != pair_id.end()) return it->second;
    int s = ib.a.add_state(p + "@" + b.state_names[q]);
    pair_id.emplace(key, s);
    return s;
  };
  for (const FttRule& r : a.rules) {
    if (!r.any) {
      int rank = a.input.rank(r.letter);
      std::vector<char> used(rank + 1, 0);
      vars_used(r.rhs, used);
      auto itb = b.rules.find(r.letter);
      if (itb == b.rules.end()) continue;
      for (const auto& [kids, tgt] : itb->second) {
        if (static_cast<int>(kids.size()) != rank) continue;
        // a dropped child still consumes an input subtree, so its automaton
        // state must be inhabited or this instance never fires on a real tree
        bool viable = true;
        for (int i = 1; i <= rank; ++i)
          if (!used[i] && !prod[kids[i - 1]]) {
            viable = false;
            break;
          }
        if (!viable) continue;
        int pq = pair_for(r.state, tgt);
        int root = ib.build(r.rhs, [&](const std::string& s, int v) {
          return pair_for(s, kids[v - 1]);
        });
        ib.eps.push_back({root, pq});
      }
    } else {
      std::vector<char> used(1, 0);
      vars_used(r.rhs, used);
      for (int q = 0; q < b.num_states(); ++q) {
        if (!used[0] && !prod[q]) continue;
        int pq = pair_for(r.state, q);
        int root =
            ib.build(r.rhs, [&](const std::string& s, int) { return pair_for(s, q); });
        ib.eps.push_back({root, pq});
      }
    }
  }
  std::set<int> finals;
  for (int qf : b.final_states) finals.insert(pair_for(a.initial, qf));
  return ib.finish(std::move(finals));
}

Ftt builder_downward(const RankedAlphabet& sigma) {
  Ftt a;
  a.input = sigma;
  a.output = sigma;
  a.states = {"p"};
  a.initial = "p";
  for (const auto& [l, rank] : sigma.letters()) {
    FttRule copy{"p", false, l, {}};
    copy.rhs.letter = l;
    for (int i = 1; i <= rank; ++i) {
      FttRhs c;
      c.call = true;
      c.state = "p";
      c.var = i;
      copy.rhs.children.push_back(std::move(c));
    }
    a.rules.push_back(std::move(copy));
    for (int i = 1; i <= rank; ++i) {
      FttRule skip{"p", false, l, {}};
      skip.rhs.call = true;
      skip.rhs.state = "p";
      skip.rhs.var = i;
      a.rules.push_back(std::move(skip));
    }
  }
  a.validate();
  return a;
}

Ftt builder_intersect(const Nfta& r) {
  r.validate();
  Ftt a;
  a.input = r.alphabet;
  a.output = r.alphabet;
  std::set<std::string> taken(r.state_names.begin(), r.state_names.end());
  std::string init = "init";
  while (taken.count(init)) init += '\'';
  a.states = r.state_names;
  a.states.push_back(init);
  a.initial = init;
  for (const auto& [l, rs] : r.rules) {
    for (const auto& [kids, tgt] : rs) {
      FttRule rule{r.state_names[tgt], false, l, {}};
      rule.rhs.letter = l;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        FttRhs c;
        c.call = true;
        c.state = r.state_names[kids[i]];
        c.var = static_cast<int>(i) + 1;
        rule.rhs.children.push_back(std::move(c));
      }
      if (r.final_states.count(tgt)) {
        FttRule top = rule;
        top.state = init;
        a.rules.push_back(std::move(top));
      }
      a.rules.push_back(std::move(rule));
    }
  }
  a.validate();
  return a;
}

Ftt builder_mark(const PreProduct& pure) {
  if (!is_pure_product(pure)) throw Error("builder_mark: product is not pure");
  Diversified d = diversify(pure);
  Stre plain;
  plain.sum.push_back(pure);
  Stre marked;
  marked.sum.push_back(d.product);
  Ftt a;
  a.input = stre_alphabet(plain);
  a.output = stre_alphabet(marked);
  a.states = {"p"};
  a.initial = "p";
  std::map<Letter, std::vector<Letter>> marks;
  for (const auto& [mark, orig] : d.original) marks[orig].push_back(mark);
  for (const auto& [l, rank] : a.input.letters()) {
    for (const Letter& m : marks[l]) {
      FttRule rule{"p", false, l, {}};
      rule.rhs.letter = m;
      for (int i = 1; i <= rank; ++i) {
        FttRhs c;
        c.call = true;
        c.state = "p";
        c.var = i;
        rule.rhs.children.push_back(std::move(c));
      }
      a.rules.push_back(std::move(rule));
    }
  }
  a.validate();
  return a;
}

namespace {

// (body root, iterate root) per iterate subexpression, in traversal order.
void collect_pad_pairs(const PreProduct& p, std::vector<std::pair<Letter, Letter>>& out) {
  if (p.kind == PreProduct::Kind::Iterate) {
    if (p.body.sum.size() != 1) throw Error("builder_pad: product is not pure");
    out.emplace_back(pure_root(p.body.sum.front()), pure_root(p));
    for (const ContextExpr& c : p.contexts)
      for (const ContextEntry& e : c.entries)
        if (!e.hole)
          for (const PreProduct& q : e.expr.sum) collect_pad_pairs(q, out);
    for (const PreProduct& q : p.body.sum) collect_pad_pairs(q, out);
  } else {
    for (const Stre& s : p.children)
      for (const PreProduct& q : s.sum) collect_pad_pairs(q, out);
  }
}

}  // namespace

Ftt builder_pad(const Diversified& d) {
  if (!is_pure_product(d.product)) throw Error("builder_pad: product is not pure");
  Stre whole;
  whole.sum.push_back(d.product);
  RankedAlphabet sigma = stre_alphabet(whole);
  std::vector<std::pair<Letter, Letter>> pairs;
  collect_pad_pairs(d.product, pairs);
  int m = static_cast<int>(pairs.size());
  if (m > 12) throw Error("builder_pad: too many iterate subexpressions");
  Ftt a;
  a.input = sigma;
  a.output = sigma;
  auto wname = [](unsigned mask) { return "w" + std::to_string(mask); };
  auto pad_name = [&](int i, const Letter& c) {
    return "pad" + std::to_string(i + 1) + "_" + c;
  };
  for (unsigned mask = 0; mask < (1u << m); ++mask) a.states.push_back(wname(mask));
  for (int i = 0; i < m; ++i)
    for (const auto& [c, rank] : sigma.letters())
      if (rank == 0 && c != pairs[i].first) a.states.push_back(pad_name(i, c));
  a.initial = wname(0);
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    // copy rules, remembering which body roots the branch has crossed
    for (const auto& [l, rank] : sigma.letters()) {
      unsigned next = mask;
      for (int i = 0; i < m; ++i)
        if (pairs[i].first == l) next |= 1u << i;
      FttRule copy{wname(mask), false, l, {}};
      copy.rhs.letter = l;
      for (int k = 1; k <= rank; ++k) {
        FttRhs c;
        c.call = true;
        c.state = wname(next);
        c.var = k;
        copy.rhs.children.push_back(std::move(c));
      }
      a.rules.push_back(std::move(copy));
    }
    // a branch still clean for pair i may start growing; the guessed leaf
    // letter is checked by the stop rule, so wrong guesses produce nothing
    for (int i = 0; i < m; ++i) {
      if (mask >> i & 1) continue;
      for (const auto& [c, rank] : sigma.letters()) {
        if (rank != 0 || c == pairs[i].first) continue;
        FttRule enter{wname(mask), true, {}, {}};
        enter.rhs.call = true;
        enter.rhs.state = pad_name(i, c);
        enter.rhs.var = 0;
        a.rules.push_back(std::move(enter));
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    const Letter& h = pairs[i].second;
    int hr = sigma.rank(h);
    for (const auto& [c, rank] : sigma.letters()) {
      if (rank != 0 || c == pairs[i].first) continue;
      FttRule spine{pad_name(i, c), true, {}, {}};
      spine.rhs.letter = h;
      FttRhs cont;
      cont.call = true;
      cont.state = pad_name(i, c);
      cont.var = 0;
      spine.rhs.children.push_back(std::move(cont));
      for (int k = 2; k <= hr; ++k) spine.rhs.children.push_back(FttRhs{false, c, {}, {}, 0});
      a.rules.push_back(std::move(spine));
      FttRule stop{pad_name(i, c), false, c, {}};
      stop.rhs.letter = c;
      a.rules.push_back(std::move(stop));
    }
  }
  a.validate();
  return a;
}

}  // namespace dcl
