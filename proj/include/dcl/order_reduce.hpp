#pragma once

#include "dcl/cost.hpp"
#include "dcl/schemes.hpp"
#include "dcl/trees.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dcl {

// Alphabet of lambda-trees: every base letter a becomes a nullary `con_a`,
// every variable x in X contributes a nullary `var_x` and a unary `lam_x`,
// and the binary `app` stands for application to a ground argument.
struct LambdaAlphabet {
  RankedAlphabet base;
  std::set<std::string> variables;

  RankedAlphabet generated() const;
};

// Classify a lambda-tree label by its reserved prefix; `payload` receives the
// base letter / variable name for Con, Var and Lam.
enum class LambdaLabelKind { Con, Var, Lam, App, Other };
LambdaLabelKind lambda_label_kind(const Letter& label,
                                  std::string* payload = nullptr);

struct WalkToken {
  enum class Kind { Down, UpVar, UpArg };
  Kind kind = Kind::Down;
  std::string var;  // UpVar only
  int arg = 0;      // UpArg only, 1..s

  static WalkToken down() { return {}; }
  static WalkToken up_var(std::string x) {
    return {Kind::UpVar, std::move(x), 0};
  }
  static WalkToken up_arg(int i) { return {Kind::UpArg, "", i}; }
  auto operator<=>(const WalkToken&) const = default;
};

struct WalkState {
  WalkToken token;
  std::vector<int> node;  // child-index path from the root

  bool operator==(const WalkState&) const = default;
};

// One step of the (X,s)-walk over a finite lambda-tree. Absent when no rule
// applies: Down at a `con_a` (the emit point), any walk off the root, a dead
// token/label pair, or a marker label.
std::optional<WalkState> successor(const Tree& t, const WalkState& st, int s);

// Evaluate the tree derived from a lambda-tree: follow the maximal walk from
// (Down, root); a walk ending Down at `con_a` emits a, whose i-th subtree is
// derived from the walk resumed at (UpArg i, same node). A walk that dies or
// provably loops yields `bot`; meeting an `unknown` input node or running out
// of fuel yields `unknown`; output deeper than `depth` is cut to `unknown`.
Tree derived_tree(const Tree& t, const RankedAlphabet& base, int s, int depth,
                  long walk_fuel = 100000);
Tree derived_tree(const RegularTree& t, const RankedAlphabet& base, int s,
                  int depth, long walk_fuel = 100000);

struct Reduction {
  Scheme scheme;
  std::vector<std::string> variables;  // X, in first-use order
  int s = 0;
};

// Order reduction: ground variables turn into `var_x` letters, their binders
// into `lam_x` letters, and applications to ground arguments into `app`
// letters; the scheme's order drops by exactly one. The input must be safe,
// homogeneous and of order >= 1. Positive-order nonterminals need a ground
// parameter; an unused one is appended automatically when every occurrence of
// the nonterminal is fully applied, otherwise the scheme is rejected.
Reduction reduce_scheme(const Scheme& g);

// The tree generated by an order-0 scheme, as an equation system.
RegularTree regular_scheme_tree(const Scheme& g);

// Lift a one-way automaton over the base alphabet to a two-way automaton
// over the lambda-tree alphabet that simulates it on the derived tree: at a
// `con_a` the lifted automaton applies delta(q, a) in an emit state carrying
// the base priority shifted up by two, entering the walk (UpArg i, node) for
// each down_i move, and replays the deterministic walk with silent counter
// actions in between. Every walking state has priority 1, so a play whose
// walk never reaches another letter is lost — trees whose derived tree is
// total behave exactly like the derived tree under the original automaton,
// and a walk into a dead end (a `bot` in the derived tree) rejects.
BAutomaton lift_automaton(const BAutomaton& a, const std::set<std::string>& X,
                          int s);

}  // namespace dcl
