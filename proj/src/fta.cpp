#include "dcl/fta.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace dcl {

int Nfta::add_state(const std::string& name) {
  state_names.push_back(name);
  return static_cast<int>(state_names.size()) - 1;
}

void Nfta::add_rule(const Letter& a, std::vector<int> children, int target) {
  rules[a].emplace_back(std::move(children), target);
}

void Nfta::validate() const {
  for (const auto& [a, rs] : rules) {
    int r = alphabet.rank(a);
    for (const auto& [cs, q] : rs) {
      if (static_cast<int>(cs.size()) != r)
        throw Error("rule arity mismatch for letter " + a);
      for (int c : cs)
        if (c < 0 || c >= num_states()) throw Error("rule child state out of range");
      if (q < 0 || q >= num_states()) throw Error("rule target state out of range");
    }
  }
  for (int q : final_states)
    if (q < 0 || q >= num_states()) throw Error("final state out of range");
}

Nfta parse_nfta(const std::string& text) {
  Nfta a;
  std::map<std::string, int> index;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto state_id = [&](const std::string& name, int ln) {
    auto it = index.find(name);
    if (it == index.end()) throw ParseError("undeclared state " + name, ln);
    return it->second;
  };
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
        if (index.count(name)) throw ParseError("duplicate state " + name, lineno);
        index[name] = a.add_state(name);
      }
      continue;
    }
    if (first == "final") {
      std::string name;
      while (ls >> name) a.final_states.insert(state_id(name, lineno));
      continue;
    }
    if (first == "letters") {
      std::string decl;
      while (ls >> decl) {
        auto slash = decl.find('/');
        if (slash == std::string::npos)
          throw ParseError("letter declaration needs name/rank", lineno);
        int rank;
        try {
          rank = std::stoi(decl.substr(slash + 1));
        } catch (const std::exception&) {
          throw ParseError("bad rank in letter declaration " + decl, lineno);
        }
        a.alphabet.add(decl.substr(0, slash), rank);
      }
      continue;
    }
    // transition:  a(q1,q2) -> q   |   c -> q
    std::string rest;
    std::getline(ls, rest);
    std::string full = first + rest;
    auto arrow = full.find("->");
    if (arrow == std::string::npos) throw ParseError("expected '->'", lineno);
    Tree lhs = parse_tree(full.substr(0, arrow));
    std::istringstream rs(full.substr(arrow + 2));
    std::string target;
    if (!(rs >> target)) throw ParseError("missing target state", lineno);
    std::vector<int> cs;
    for (const Tree& c : lhs.children) {
      if (!c.children.empty()) throw ParseError("nested transition lhs", lineno);
      cs.push_back(state_id(c.label, lineno));
    }
    if (!a.alphabet.contains(lhs.label))
      a.alphabet.add(lhs.label, static_cast<int>(cs.size()));
    a.add_rule(lhs.label, std::move(cs), state_id(target, lineno));
  }
  a.validate();
  return a;
}

std::string to_string(const Nfta& a) {
  std::string out = "states";
  for (const auto& n : a.state_names) out += " " + n;
  out += "\nletters";
  for (const auto& [l, r] : a.alphabet.letters()) out += " " + l + "/" + std::to_string(r);
  out += "\nfinal";
  for (int q : a.final_states) out += " " + a.state_names[q];
  out += "\n";
  for (const auto& [l, rs] : a.rules) {
    for (const auto& [cs, q] : rs) {
      out += l;
      if (!cs.empty()) {
        out += '(';
        for (std::size_t i = 0; i < cs.size(); ++i) {
          if (i) out += ',';
          out += a.state_names[cs[i]];
        }
        out += ')';
      }
      out += " -> " + a.state_names[q] + "\n";
    }
  }
  return out;
}

namespace {
std::set<int> run_states(const Nfta& a, const Tree& t) {
  std::vector<std::set<int>> child_states;
  for (const Tree& c : t.children) child_states.push_back(run_states(a, c));
  std::set<int> out;
  auto it = a.rules.find(t.label);
  if (it == a.rules.end()) return out;
  for (const auto& [cs, q] : it->second) {
    if (cs.size() != t.children.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < cs.size() && ok; ++i)
      ok = child_states[i].count(cs[i]) != 0;
    if (ok) out.insert(q);
  }
  return out;
}
}  // namespace

bool member(const Nfta& a, const Tree& t) {
  std::set<int> qs = run_states(a, t);
  return std::any_of(qs.begin(), qs.end(),
                     [&](int q) { return a.final_states.count(q) != 0; });
}

namespace {
std::set<int> reachable_states(const Nfta& a) {
  std::set<int> reach;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [l, rs] : a.rules) {
      (void)l;
      for (const auto& [cs, q] : rs) {
        if (reach.count(q)) continue;
        bool ok = std::all_of(cs.begin(), cs.end(),
                              [&](int c) { return reach.count(c) != 0; });
        if (ok) {
          reach.insert(q);
          changed = true;
        }
      }
    }
  }
  return reach;
}
}  // namespace

bool is_empty(const Nfta& a) {
  std::set<int> reach = reachable_states(a);
  return std::none_of(a.final_states.begin(), a.final_states.end(),
                      [&](int q) { return reach.count(q) != 0; });
}

std::optional<Tree> witness(const Nfta& a) {
  // smallest witness tree per state, by iterated relaxation
  std::map<int, Tree> best;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [l, rs] : a.rules) {
      for (const auto& [cs, q] : rs) {
        std::vector<Tree> kids;
        bool ok = true;
        std::size_t sz = 1;
        for (int c : cs) {
          auto it = best.find(c);
          if (it == best.end()) {
            ok = false;
            break;
          }
          kids.push_back(it->second);
          sz += it->second.size();
        }
        if (!ok) continue;
        Tree cand(l, kids);
        auto it = best.find(q);
        if (it == best.end() || sz < it->second.size()) {
          best[q] = std::move(cand);
          changed = true;
        }
      }
    }
  }
  std::optional<Tree> out;
  for (int q : a.final_states) {
    auto it = best.find(q);
    if (it != best.end() && (!out || it->second.size() < out->size() ||
                             (it->second.size() == out->size() && it->second < *out)))
      out = it->second;
  }
  return out;
}

Nfta product(const Nfta& a, const Nfta& b) {
  Nfta out;
  out.alphabet = merge_alphabets(a.alphabet, b.alphabet);
  std::map<std::pair<int, int>, int> index;
  auto id = [&](int qa, int qb) {
    auto key = std::make_pair(qa, qb);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    int q = out.add_state("<" + a.state_names[qa] + "," + b.state_names[qb] + ">");
    index[key] = q;
    return q;
  };
  // discover reachable pairs bottom-up
  bool changed = true;
  std::set<std::pair<int, int>> seen;
  while (changed) {
    changed = false;
    for (const auto& [l, ra] : a.rules) {
      auto itb = b.rules.find(l);
      if (itb == b.rules.end()) continue;
      for (const auto& [csa, qa] : ra) {
        for (const auto& [csb, qb] : itb->second) {
          if (csa.size() != csb.size()) continue;
          bool ok = true;
          for (std::size_t i = 0; i < csa.size() && ok; ++i)
            ok = seen.count({csa[i], csb[i]}) != 0;
          if (!ok) continue;
          if (seen.insert({qa, qb}).second) changed = true;
        }
      }
    }
  }
  for (const auto& [qa, qb] : seen) id(qa, qb);
  for (const auto& [l, ra] : a.rules) {
    auto itb = b.rules.find(l);
    if (itb == b.rules.end()) continue;
    for (const auto& [csa, qa] : ra) {
      for (const auto& [csb, qb] : itb->second) {
        if (csa.size() != csb.size()) continue;
        bool ok = true;
        std::vector<int> cs;
        for (std::size_t i = 0; i < csa.size() && ok; ++i) {
          if (!seen.count({csa[i], csb[i]})) {
            ok = false;
            break;
          }
          cs.push_back(id(csa[i], csb[i]));
        }
        if (!ok || !seen.count({qa, qb})) continue;
        out.add_rule(l, std::move(cs), id(qa, qb));
      }
    }
  }
  for (int fa : a.final_states)
    for (int fb : b.final_states)
      if (seen.count({fa, fb})) out.final_states.insert(id(fa, fb));
  return out;
}

Nfta union_of(const Nfta& a, const Nfta& b) {
  Nfta out;
  out.alphabet = merge_alphabets(a.alphabet, b.alphabet);
  for (const auto& n : a.state_names) out.add_state("l_" + n);
  int off = a.num_states();
  for (const auto& n : b.state_names) out.add_state("r_" + n);
  for (const auto& [l, rs] : a.rules)
    for (const auto& [cs, q] : rs) out.add_rule(l, cs, q);
  for (const auto& [l, rs] : b.rules)
    for (const auto& [cs, q] : rs) {
      std::vector<int> cs2;
      for (int c : cs) cs2.push_back(c + off);
      out.add_rule(l, std::move(cs2), q + off);
    }
  for (int q : a.final_states) out.final_states.insert(q);
  for (int q : b.final_states) out.final_states.insert(q + off);
  return out;
}

Nfta determinize(const Nfta& a) {
  // states of the result: reachable subsets, plus the empty subset sink
  std::map<std::set<int>, int> index;
  std::vector<std::set<int>> subsets;
  Nfta out;
  out.alphabet = a.alphabet;
  auto id = [&](const std::set<int>& s) {
    auto it = index.find(s);
    if (it != index.end()) return it->second;
    std::string name = "{";
    for (int q : s) name += (name.size() > 1 ? "," : "") + a.state_names[q];
    name += "}";
    int q = out.add_state(name);
    index[s] = q;
    subsets.push_back(s);
    return q;
  };
  id({});  // sink
  // iterate: for each letter, for each tuple of known subsets, compute target
  bool changed = true;
  while (changed) {
    changed = false;
    std::size_t known = subsets.size();
    for (const auto& [l, rs] : a.rules) {
      int r = a.alphabet.rank(l);
      // enumerate tuples over current subsets
      std::vector<std::size_t> tuple(r, 0);
      while (true) {
        std::set<int> target;
        for (const auto& [cs, q] : rs) {
          bool ok = true;
          for (int i = 0; i < r && ok; ++i)
            ok = subsets[tuple[i]].count(cs[i]) != 0;
          if (ok) target.insert(q);
        }
        std::size_t before = subsets.size();
        id(target);
        if (subsets.size() > before) changed = true;
        // advance tuple
        int i = r - 1;
        for (; i >= 0; --i) {
          if (++tuple[i] < known) break;
          tuple[i] = 0;
        }
        if (i < 0) break;
      }
    }
  }
  // now emit complete transition table over final subset list
  std::size_t n = subsets.size();
  for (const auto& [l, r0] : out.alphabet.letters()) {
    int r = r0;
    auto it = a.rules.find(l);
    std::vector<std::size_t> tuple(r, 0);
    while (true) {
      std::set<int> target;
      if (it != a.rules.end()) {
        for (const auto& [cs, q] : it->second) {
          bool ok = true;
          for (int i = 0; i < r && ok; ++i)
            ok = subsets[tuple[i]].count(cs[i]) != 0;
          if (ok) target.insert(q);
        }
      }
      std::vector<int> cs;
      for (int i = 0; i < r; ++i) cs.push_back(index.at(subsets[tuple[i]]));
      out.add_rule(l, std::move(cs), index.at(target));
      int i = r - 1;
      for (; i >= 0; --i) {
        if (++tuple[i] < n) break;
        tuple[i] = 0;
      }
      if (i < 0) break;
    }
  }
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    bool fin = std::any_of(subsets[s].begin(), subsets[s].end(),
                           [&](int q) { return a.final_states.count(q) != 0; });
    if (fin) out.final_states.insert(index.at(subsets[s]));
  }
  return out;
}

Nfta complement(const Nfta& a) {
  Nfta d = determinize(a);
  std::set<int> flipped;
  for (int q = 0; q < d.num_states(); ++q)
    if (!d.final_states.count(q)) flipped.insert(q);
  d.final_states = std::move(flipped);
  return d;
}

bool includes(const Nfta& outer, const Nfta& inner) {
  // determinize over the merged alphabet so trees using letters unknown to
  // outer land in the empty-subset sink and count as outside L(outer)
  Nfta o = outer;
  o.alphabet = merge_alphabets(outer.alphabet, inner.alphabet);
  return is_empty(product(inner, complement(o)));
}

bool equivalent(const Nfta& a, const Nfta& b) {
  return includes(a, b) && includes(b, a);
}

Nfta nfta_for_trees(const RankedAlphabet& sigma, const std::set<Tree>& trees) {
  Nfta out;
  out.alphabet = sigma;
  std::map<Tree, int> index;
  auto rec = [&](auto&& self, const Tree& t) -> int {
    auto it = index.find(t);
    if (it != index.end()) return it->second;
    std::vector<int> cs;
    for (const Tree& c : t.children) cs.push_back(self(self, c));
    int q = out.add_state("t" + std::to_string(out.num_states()));
    index[t] = q;
    if (!out.alphabet.contains(t.label))
      out.alphabet.add(t.label, static_cast<int>(t.children.size()));
    out.add_rule(t.label, std::move(cs), q);
    return q;
  };
  for (const Tree& t : trees) out.final_states.insert(rec(rec, t));
  return out;
}

Nfta nfta_all(const RankedAlphabet& sigma) {
  Nfta out;
  out.alphabet = sigma;
  int q = out.add_state("q");
  out.final_states.insert(q);
  for (const auto& [l, r] : sigma.letters())
    out.add_rule(l, std::vector<int>(r, q), q);
  return out;
}

std::set<Tree> enumerate_members(const Nfta& a, std::size_t size_bound) {
  // trees_by_state[q] = accepted-at-q trees of size <= bound
  std::map<int, std::set<Tree>> by_state;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [l, rs] : a.rules) {
      for (const auto& [cs, q] : rs) {
        std::vector<const std::set<Tree>*> parts;
        bool ok = true;
        for (int c : cs) {
          auto it = by_state.find(c);
          if (it == by_state.end() || it->second.empty()) {
            ok = false;
            break;
          }
          parts.push_back(&it->second);
        }
        if (!ok) continue;
        std::vector<Tree> acc(cs.size());
        auto rec = [&](auto&& self, std::size_t i, std::size_t used) -> void {
          if (used > size_bound) return;
          if (i == parts.size()) {
            Tree t(l, acc);
            if (by_state[q].insert(std::move(t)).second) changed = true;
            return;
          }
          for (const Tree& option : *parts[i]) {
            if (used + option.size() > size_bound) continue;
            acc[i] = option;
            self(self, i + 1, used + option.size());
          }
        };
        rec(rec, 0, 1);
      }
    }
  }
  std::set<Tree> out;
  for (int q : a.final_states) {
    auto it = by_state.find(q);
    if (it != by_state.end()) out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

}  // namespace dcl
