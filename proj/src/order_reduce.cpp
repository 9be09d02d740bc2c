#include "dcl/order_reduce.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dcl {

RankedAlphabet LambdaAlphabet::generated() const {
  RankedAlphabet out;
  for (const auto& [name, rank] : base.letters()) out.add("con_" + name, 0);
  for (const std::string& x : variables) {
    out.add("var_" + x, 0);
    out.add("lam_" + x, 1);
  }
  out.add("app", 2);
  return out;
}

LambdaLabelKind lambda_label_kind(const Letter& label, std::string* payload) {
  if (label == "app") return LambdaLabelKind::App;
  auto tagged = [&](const char* tag) {
    return label.size() > 4 && label.rfind(tag, 0) == 0;
  };
  LambdaLabelKind kind = LambdaLabelKind::Other;
  if (tagged("con_"))
    kind = LambdaLabelKind::Con;
  else if (tagged("var_"))
    kind = LambdaLabelKind::Var;
  else if (tagged("lam_"))
    kind = LambdaLabelKind::Lam;
  if (kind != LambdaLabelKind::Other && payload) *payload = label.substr(4);
  return kind;
}

// --- The (X,s)-walk --------------------------------------------------------

namespace {

struct Step {
  enum class Where { Child1, Child2, Parent, Stay };
  Where where;
  WalkToken next;
};

std::optional<Step> step_rule(const WalkToken& tok, const Letter& label,
                              int s) {
  std::string x;
  LambdaLabelKind k = lambda_label_kind(label, &x);
  using W = Step::Where;
  switch (tok.kind) {
    case WalkToken::Kind::Down:
      if (k == LambdaLabelKind::Lam || k == LambdaLabelKind::App)
        return Step{W::Child1, WalkToken::down()};
      if (k == LambdaLabelKind::Var)
        return Step{W::Stay, WalkToken::up_var(x)};
      return std::nullopt;  // con_a is the emit point; markers stop the walk
    case WalkToken::Kind::UpVar:
      if (k == LambdaLabelKind::Other) return std::nullopt;
      if (k == LambdaLabelKind::Lam && x == tok.var)
        return Step{W::Parent, WalkToken::up_arg(1)};
      return Step{W::Parent, WalkToken::up_var(tok.var)};
    case WalkToken::Kind::UpArg:
      if (k == LambdaLabelKind::Lam) {
        if (tok.arg < s) return Step{W::Parent, WalkToken::up_arg(tok.arg + 1)};
        return std::nullopt;
      }
      if (k == LambdaLabelKind::App) {
        if (tok.arg > 1) return Step{W::Parent, WalkToken::up_arg(tok.arg - 1)};
        return Step{W::Child2, WalkToken::down()};
      }
      if (k == LambdaLabelKind::Con)
        return Step{W::Parent, tok};  // resume the walk above the letter
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::optional<WalkState> successor(const Tree& t, const WalkState& st, int s) {
  const Tree* n = &t;
  for (int i : st.node) {
    if (i < 0 || i >= static_cast<int>(n->children.size()))
      throw Error("walk state points outside the tree");
    n = &n->children[i];
  }
  auto r = step_rule(st.token, n->label, s);
  if (!r) return std::nullopt;
  WalkState out{r->next, st.node};
  switch (r->where) {
    case Step::Where::Child1:
      if (n->children.empty()) return std::nullopt;
      out.node.push_back(0);
      break;
    case Step::Where::Child2:
      if (n->children.size() < 2) return std::nullopt;
      out.node.push_back(1);
      break;
    case Step::Where::Parent:
      if (out.node.empty()) return std::nullopt;
      out.node.pop_back();
      break;
    case Step::Where::Stay:
      break;
  }
  return out;
}

// --- Derived trees ----------------------------------------------------------

namespace {

struct FiniteStore {
  struct N {
    Letter label;
    int parent;
    std::vector<int> kids;
  };
  std::vector<N> nodes;

  explicit FiniteStore(const Tree& t) { build(t, -1); }
  int build(const Tree& t, int parent) {
    int id = static_cast<int>(nodes.size());
    nodes.push_back({t.label, parent, {}});
    for (const Tree& c : t.children) {
      int kid = build(c, id);
      nodes[id].kids.push_back(kid);
    }
    return id;
  }
  const Letter& label(int id) const { return nodes[id].label; }
  int parent(int id) const { return nodes[id].parent; }
  int child(int id, int i) {
    const auto& kids = nodes[id].kids;
    return i < static_cast<int>(kids.size()) ? kids[i] : -1;
  }
  int root() const { return 0; }
};

struct RegularStore {
  const RegularTree& t;
  struct N {
    int parent;
    const RegularTree::Node* eq;
  };
  std::vector<N> nodes;
  std::map<std::pair<int, std::string>, int> interned;

  explicit RegularStore(const RegularTree& tree) : t(tree) {}
  int intern(int parent, const std::string& name) {
    auto [it, fresh] =
        interned.try_emplace({parent, name}, static_cast<int>(nodes.size()));
    if (fresh) nodes.push_back({parent, &t.at(name)});
    return it->second;
  }
  const Letter& label(int id) const { return nodes[id].eq->label; }
  int parent(int id) const { return nodes[id].parent; }
  int child(int id, int i) {
    const auto& kids = nodes[id].eq->children;
    return i < static_cast<int>(kids.size()) ? intern(id, kids[i]) : -1;
  }
  int root() { return intern(-1, t.root); }
};

enum class WalkOutcome { Emit, Dead, Undecided };

template <class Store>
WalkOutcome run_walk(Store& store, int s, long& fuel, WalkToken tok, int node,
                     int& emit_node) {
  std::set<std::pair<WalkToken, int>> seen;
  for (;;) {
    const Letter& l = store.label(node);
    if (l == kUnknown) return WalkOutcome::Undecided;
    if (l == kBottom) return WalkOutcome::Dead;
    if (tok.kind == WalkToken::Kind::Down &&
        lambda_label_kind(l) == LambdaLabelKind::Con) {
      emit_node = node;
      return WalkOutcome::Emit;
    }
    if (fuel-- <= 0) return WalkOutcome::Undecided;
    if (!seen.insert({tok, node}).second) return WalkOutcome::Dead;
    auto r = step_rule(tok, l, s);
    if (!r) return WalkOutcome::Dead;
    int next = node;
    switch (r->where) {
      case Step::Where::Child1: next = store.child(node, 0); break;
      case Step::Where::Child2: next = store.child(node, 1); break;
      case Step::Where::Parent: next = store.parent(node); break;
      case Step::Where::Stay: break;
    }
    if (next < 0) return WalkOutcome::Dead;
    tok = r->next;
    node = next;
  }
}

template <class Store>
Tree derive(Store& store, const RankedAlphabet& base, int s, int level,
            int depth, long& fuel, WalkToken tok, int node) {
  if (level > depth) return Tree(kUnknown);
  int emit_node = -1;
  switch (run_walk(store, s, fuel, tok, node, emit_node)) {
    case WalkOutcome::Dead: return Tree(kBottom);
    case WalkOutcome::Undecided: return Tree(kUnknown);
    case WalkOutcome::Emit: break;
  }
  std::string a;
  lambda_label_kind(store.label(emit_node), &a);
  if (!base.contains(a))
    throw Error("derived letter " + a + " is not in the base alphabet");
  Tree out(a);
  for (int i = 1; i <= base.rank(a); ++i)
    out.children.push_back(derive(store, base, s, level + 1, depth, fuel,
                                  WalkToken::up_arg(i), emit_node));
  return out;
}

}  // namespace

Tree derived_tree(const Tree& t, const RankedAlphabet& base, int s, int depth,
                  long walk_fuel) {
  FiniteStore store(t);
  return derive(store, base, s, 1, depth, walk_fuel, WalkToken::down(),
                store.root());
}

Tree derived_tree(const RegularTree& t, const RankedAlphabet& base, int s,
                  int depth, long walk_fuel) {
  t.validate();
  RegularStore store(t);
  return derive(store, base, s, 1, depth, walk_fuel, WalkToken::down(),
                store.root());
}

// --- Order reduction --------------------------------------------------------

namespace {

using Kind = LambdaTerm::Kind;

SimpleType term_type(const LambdaTerm& t, const Scheme& g) {
  switch (t.kind) {
    case Kind::Letter: {
      SimpleType ty;
      ty.args.assign(g.alphabet.rank(t.name), SimpleType{});
      return ty;
    }
    case Kind::Variable:
      return t.type;
    case Kind::Nonterminal: {
      const SimpleType* ty = g.nonterminal_type(t.name);
      if (!ty) throw Error("unknown nonterminal " + t.name);
      return *ty;
    }
    case Kind::Lambda: {
      SimpleType ty = term_type(*t.body, g);
      ty.args.insert(ty.args.begin(), t.type);
      return ty;
    }
    case Kind::Application: {
      SimpleType f = term_type(*t.fun, g);
      if (f.args.empty()) throw Error("application of a ground term");
      f.args.erase(f.args.begin());
      return f;
    }
  }
  throw Error("malformed term");
}

int trailing_ground(const SimpleType& ty) {
  int m = 0;
  for (auto it = ty.args.rbegin(); it != ty.args.rend() && it->is_ground();
       ++it)
    ++m;
  return m;
}

// T-image of a type: ground arguments vanish, the rest drop one order.
SimpleType reduce_type(const SimpleType& ty) {
  SimpleType out;
  for (const SimpleType& a : ty.args)
    if (!a.is_ground()) out.args.push_back(reduce_type(a));
  return out;
}

void scan_subterm_types(const LambdaTerm& t, const Scheme& g, int& s) {
  s = std::max(s, trailing_ground(term_type(t, g)));
  switch (t.kind) {
    case Kind::Lambda: scan_subterm_types(*t.body, g, s); break;
    case Kind::Application:
      scan_subterm_types(*t.fun, g, s);
      scan_subterm_types(*t.arg, g, s);
      break;
    default: break;
  }
}

struct RulePieces {
  std::vector<std::pair<std::string, SimpleType>> params;
  TermPtr body;
};

RulePieces peel(TermPtr rule) {
  RulePieces out;
  while (rule->kind == Kind::Lambda) {
    out.params.emplace_back(rule->name, rule->type);
    rule = rule->body;
  }
  out.body = std::move(rule);
  return out;
}

TermPtr rewrap(const RulePieces& r) {
  TermPtr out = r.body;
  for (auto it = r.params.rbegin(); it != r.params.rend(); ++it)
    out = mk_lambda(it->first, it->second, out);
  return out;
}

TermPtr rename_vars(const TermPtr& t,
                    const std::map<std::string, std::string>& ren) {
  switch (t->kind) {
    case Kind::Variable: {
      auto it = ren.find(t->name);
      return it == ren.end() ? t : mk_variable(it->second, t->type);
    }
    case Kind::Application:
      return mk_application(rename_vars(t->fun, ren), rename_vars(t->arg, ren));
    case Kind::Lambda:
      return mk_lambda(t->name, t->type, rename_vars(t->body, ren));
    default:
      return t;
  }
}

// Occurrences of nonterminals in `arity` must be applied to exactly that
// many arguments, or appending a parameter would change a context's type.
void check_fully_applied(const LambdaTerm& t, int applied,
                         const std::map<std::string, int>& arity) {
  switch (t.kind) {
    case Kind::Nonterminal: {
      auto it = arity.find(t.name);
      if (it != arity.end() && applied != it->second)
        throw Error("cannot append a ground parameter to " + t.name +
                    ": it occurs partially applied");
      return;
    }
    case Kind::Application:
      check_fully_applied(*t.fun, applied + 1, arity);
      check_fully_applied(*t.arg, 0, arity);
      return;
    case Kind::Lambda:
      check_fully_applied(*t.body, 0, arity);
      return;
    default:
      return;
  }
}

bool mentions(const LambdaTerm& t, const std::set<std::string>& names) {
  switch (t.kind) {
    case Kind::Nonterminal: return names.count(t.name) != 0;
    case Kind::Application:
      return mentions(*t.fun, names) || mentions(*t.arg, names);
    case Kind::Lambda: return mentions(*t.body, names);
    default: return false;
  }
}

// Append `filler` to every full application chain headed by a target.
TermPtr append_filler(const TermPtr& t, const std::set<std::string>& targets,
                      const TermPtr& filler) {
  std::vector<TermPtr> args;
  TermPtr head = t;
  while (head->kind == Kind::Application) {
    args.push_back(head->arg);
    head = head->fun;
  }
  std::reverse(args.begin(), args.end());
  TermPtr out = head;
  if (head->kind == Kind::Lambda)
    out = mk_lambda(head->name, head->type,
                    append_filler(head->body, targets, filler));
  for (const TermPtr& a : args)
    out = mk_application(out, append_filler(a, targets, filler));
  if (head->kind == Kind::Nonterminal && targets.count(head->name))
    out = mk_application(out, filler);
  return out;
}

// Reduced form of an applicative rule body.
TermPtr transform(const TermPtr& t, const Scheme& g) {
  switch (t->kind) {
    case Kind::Letter:
      return mk_letter("con_" + t->name);
    case Kind::Variable:
      if (t->type.is_ground()) return mk_letter("var_" + t->name);
      return mk_variable(t->name, reduce_type(t->type));
    case Kind::Nonterminal:
      return mk_nonterminal(t->name);
    case Kind::Application: {
      TermPtr fun = transform(t->fun, g);
      TermPtr arg = transform(t->arg, g);
      if (term_type(*t->arg, g).is_ground())
        return mk_application(mk_application(mk_letter("app"), fun), arg);
      return mk_application(fun, arg);
    }
    case Kind::Lambda:
      throw Error("unexpected inner lambda in a rule body");
  }
  throw Error("malformed term");
}

}  // namespace

Reduction reduce_scheme(const Scheme& g) {
  g.validate();
  typecheck(g);
  SafetyReport sr = check_safety(g);
  if (!sr.safe)
    throw Error("scheme is not safe (rule " + sr.rule + ", variable " +
                sr.variable + ")");
  for (const auto& [name, ty] : g.nonterminals)
    if (!ty.homogeneous())
      throw Error("nonterminal " + name + " has a non-homogeneous type " +
                  ty.str());
  if (scheme_order(g) < 1)
    throw Error("scheme already has order 0; nothing to reduce");

  Scheme g2 = g;

  // Rename parameters apart so one letter per variable stays unambiguous.
  std::set<std::string> used;
  for (const auto& [n, ty] : g2.nonterminals) used.insert(n);
  for (const auto& [l, r] : g2.alphabet.letters()) used.insert(l);
  for (const auto& [name, ty] : g2.nonterminals) {
    RulePieces r = peel(g2.rules.at(name));
    std::map<std::string, std::string> ren;
    for (auto& [pn, pt] : r.params) {
      std::string fresh = pn;
      int k = 0;
      while (used.count(fresh)) fresh = pn + std::to_string(++k);
      used.insert(fresh);
      if (fresh != pn) {
        ren[pn] = fresh;
        pn = fresh;
      }
    }
    if (!ren.empty()) r.body = rename_vars(r.body, ren);
    g2.rules[name] = rewrap(r);
  }

  // Positive-order nonterminals need a ground parameter; append an unused one.
  std::map<std::string, int> missing;  // name -> arity before the change
  for (const auto& [n, ty] : g2.nonterminals) {
    bool ground_arg = false;
    for (const SimpleType& a : ty.args) ground_arg |= a.is_ground();
    if (ty.order() >= 1 && !ground_arg)
      missing[n] = static_cast<int>(ty.args.size());
  }
  if (!missing.empty()) {
    std::set<std::string> targets;
    for (const auto& [n, k] : missing) targets.insert(n);
    for (const auto& [name, ty] : g2.nonterminals)
      check_fully_applied(*g2.rules.at(name), 0, missing);
    for (auto& [n, ty] : g2.nonterminals)
      if (targets.count(n)) ty.args.push_back(SimpleType{});
    for (const auto& [n, k] : missing) {
      std::string dummy = "d";
      int c = 0;
      while (used.count(dummy)) dummy = "d" + std::to_string(++c);
      used.insert(dummy);
      RulePieces r = peel(g2.rules.at(n));
      r.params.emplace_back(dummy, SimpleType{});
      g2.rules[n] = rewrap(r);
    }
    for (const auto& [name, ty] : g2.nonterminals) {
      RulePieces r = peel(g2.rules.at(name));
      if (!mentions(*r.body, targets)) continue;
      TermPtr filler;
      for (const auto& [pn, pt] : r.params)
        if (pt.is_ground()) filler = mk_variable(pn, SimpleType{});
      if (!filler)
        for (const auto& [l, rank] : g2.alphabet.letters())
          if (rank == 0 && !filler) filler = mk_letter(l);
      if (!filler)
        throw Error("cannot append a ground parameter: rule " + name +
                    " has no ground argument to pass along");
      r.body = append_filler(r.body, targets, filler);
      g2.rules[name] = rewrap(r);
    }
    typecheck(g2);
  }

  Reduction red;
  LambdaAlphabet sig;
  sig.base = g2.alphabet;
  for (const auto& [name, ty] : g2.nonterminals) {
    for (const auto& [pn, pt] : peel(g2.rules.at(name)).params)
      if (pt.is_ground()) {
        red.variables.push_back(pn);
        sig.variables.insert(pn);
      }
    scan_subterm_types(*g2.rules.at(name), g2, red.s);
  }

  red.scheme.alphabet = sig.generated();
  red.scheme.initial = g2.initial;
  for (const auto& [name, ty] : g2.nonterminals) {
    red.scheme.nonterminals.emplace_back(name, reduce_type(ty));
    RulePieces r = peel(g2.rules.at(name));
    TermPtr body = transform(r.body, g2);
    for (auto it = r.params.rbegin(); it != r.params.rend(); ++it) {
      if (!it->second.is_ground()) continue;
      body = mk_application(mk_letter("lam_" + it->first), body);
    }
    RulePieces out;
    for (const auto& [pn, pt] : r.params)
      if (!pt.is_ground()) out.params.emplace_back(pn, reduce_type(pt));
    out.body = body;
    red.scheme.rules[name] = rewrap(out);
  }
  red.scheme.validate();
  typecheck(red.scheme);
  return red;
}

// --- Regular trees of order-0 schemes ---------------------------------------

namespace {

struct TreeBuilder {
  const Scheme& g;
  RegularTree out;
  std::set<std::string> taken;

  std::string fresh(std::string base) {
    while (taken.count(base)) base += "'";
    taken.insert(base);
    return base;
  }

  void emit(const std::string& name, const LambdaTerm& t) {
    std::vector<const LambdaTerm*> args;
    const LambdaTerm* head = &t;
    while (head->kind == Kind::Application) {
      args.push_back(head->arg.get());
      head = head->fun.get();
    }
    std::reverse(args.begin(), args.end());
    if (head->kind != Kind::Letter)
      throw Error("rule for " + name + " is not letter-headed");
    RegularTree::Node node;
    node.label = head->name;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i]->kind == Kind::Nonterminal) {
        node.children.push_back(args[i]->name);
      } else {
        std::string child = fresh(name + "." + std::to_string(i + 1));
        node.children.push_back(child);
        emit(child, *args[i]);
      }
    }
    out.equations[name] = std::move(node);
  }
};

}  // namespace

RegularTree regular_scheme_tree(const Scheme& g) {
  g.validate();
  typecheck(g);
  if (scheme_order(g) != 0)
    throw Error("only an order-0 scheme generates a regular tree directly");
  TreeBuilder b{g, {}, {}};
  b.out.root = g.initial;
  for (const auto& [name, ty] : g.nonterminals) b.taken.insert(name);
  for (const auto& [name, ty] : g.nonterminals) {
    const LambdaTerm& rule = *g.rules.at(name);
    if (rule.kind == Kind::Lambda)
      throw Error("rule for " + name + " still binds parameters");
    b.emit(name, rule);
  }
  b.out.validate();
  return b.out;
}

// --- Lifting one-way automata ------------------------------------------------

BAutomaton lift_automaton(const BAutomaton& a, const std::set<std::string>& X,
                          int s) {
  a.validate();
  if (!a.one_way())
    throw Error("lift_automaton needs a one-way automaton (no up moves)");
  if (s < 1) throw Error("the walk bound s must be at least 1");

  BAutomaton out;
  LambdaAlphabet sig{a.alphabet, X};
  out.alphabet = sig.generated();
  out.counters = a.counters;
  const CounterAction silent(a.counters, CounterOp::Skip);

  // Emit disjuncts target arg states up to the letter rank even when the
  // walk bound is smaller; walks through a lambda still cut off at s.
  int max_arg = s;
  for (const auto& [l, rank] : a.alphabet.letters())
    max_arg = std::max(max_arg, rank);

  auto down_name = [](const std::string& q) { return q + "@down"; };
  auto emit_name = [](const std::string& q) { return q + "@emit"; };
  auto var_name = [](const std::string& q, const std::string& x) {
    return q + "@up_" + x;
  };
  auto arg_name = [](const std::string& q, int i) {
    return q + "@arg" + std::to_string(i);
  };
  std::string sink = "sink";
  {
    std::set<std::string> names;
    for (const auto& [q, pr] : a.states) {
      names.insert(down_name(q));
      names.insert(emit_name(q));
      for (const std::string& x : X) names.insert(var_name(q, x));
      for (int i = 1; i <= max_arg; ++i) names.insert(arg_name(q, i));
    }
    while (names.count(sink)) sink += "'";
  }

  for (const auto& [q, pr] : a.states) {
    out.states.emplace_back(down_name(q), 1);
    out.states.emplace_back(emit_name(q), pr + 2);
    for (const std::string& x : X) out.states.emplace_back(var_name(q, x), 1);
    for (int i = 1; i <= max_arg; ++i) out.states.emplace_back(arg_name(q, i), 1);
  }
  out.states.emplace_back(sink, 1);
  out.initial = down_name(a.initial);

  const Conjunct sink_move{Move{kStay, silent, sink}};
  auto single = [&](int dir, const std::string& st) {
    return Dnf{Conjunct{Move{dir, silent, st}}};
  };
  auto with_sink = [&](Dnf d) {
    d.push_back(sink_move);
    return d;
  };

  for (const auto& [letter, rank] : out.alphabet.letters()) {
    (void)rank;
    std::string x;
    LambdaLabelKind k = lambda_label_kind(letter, &x);
    for (const auto& [q, pr] : a.states) {
      Dnf down;
      switch (k) {
        case LambdaLabelKind::Lam:
        case LambdaLabelKind::App:
          down = single(1, down_name(q));
          break;
        case LambdaLabelKind::Var:
          down = single(kStay, var_name(q, x));
          break;
        case LambdaLabelKind::Con:
          down = single(kStay, emit_name(q));
          break;
        case LambdaLabelKind::Other:
          down = Dnf{sink_move};
          break;
      }
      out.delta[{down_name(q), letter}] = std::move(down);

      // The priority-bearing state fires the base transition at a letter.
      Dnf emit{sink_move};
      if (k == LambdaLabelKind::Con) {
        auto it = a.delta.find({q, x});
        if (it != a.delta.end()) {
          emit.clear();
          bool up_free = false;
          for (const Conjunct& c : it->second) {
            Conjunct lifted;
            bool uses_up = false;
            for (const Move& m : c) {
              if (m.direction == kStay) {
                lifted.push_back({kStay, m.action, emit_name(m.state)});
              } else {
                lifted.push_back(
                    {kUp, m.action, arg_name(m.state, m.direction)});
                uses_up = true;
              }
            }
            up_free |= !uses_up;
            emit.push_back(std::move(lifted));
          }
          if (!up_free) emit.push_back(sink_move);
        }
      }
      out.delta[{emit_name(q), letter}] = std::move(emit);

      for (const std::string& v : X) {
        Dnf d;
        if (k == LambdaLabelKind::Other)
          d = Dnf{sink_move};
        else if (k == LambdaLabelKind::Lam && x == v)
          d = with_sink(single(kUp, arg_name(q, 1)));
        else
          d = with_sink(single(kUp, var_name(q, v)));
        out.delta[{var_name(q, v), letter}] = std::move(d);
      }
      for (int i = 1; i <= max_arg; ++i) {
        Dnf d;
        if (k == LambdaLabelKind::Lam)
          d = i < s ? with_sink(single(kUp, arg_name(q, i + 1)))
                    : Dnf{sink_move};
        else if (k == LambdaLabelKind::App)
          d = i > 1 ? with_sink(single(kUp, arg_name(q, i - 1)))
                    : single(2, down_name(q));
        else if (k == LambdaLabelKind::Con)
          d = with_sink(single(kUp, arg_name(q, i)));
        else
          d = Dnf{sink_move};
        out.delta[{arg_name(q, i), letter}] = std::move(d);
      }
    }
    out.delta[{sink, letter}] = Dnf{sink_move};
  }
  out.validate();
  return out;
}

}  // namespace dcl
