#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "dcl/fta.hpp"
#include "dcl/stre.hpp"
#include "dcl/trees.hpp"

namespace dcl {

// Right-hand side of a transducer rule: a tree over the output alphabet
// whose leaves may also be (state, variable) calls.  Calls carry 1-based
// variable indices in letter rules; the single variable of an any-rule is
// index 0 and prints as plain x.
struct FttRhs {
  bool call = false;
  Letter letter;                 // when !call
  std::vector<FttRhs> children;  // when !call
  std::string state;             // when call
  int var = 0;                   // when call

  bool operator==(const FttRhs&) const = default;
};

// (state, a(x1,..,xr)) -> rhs, or with any = true (state, x) -> rhs.
// Letter rules match subtrees rooted in their letter; any-rules match every
// subtree and keep it unconsumed for the calls in their output.
struct FttRule {
  std::string state;
  bool any = false;
  Letter letter;  // when !any
  FttRhs rhs;

  bool operator==(const FttRule&) const = default;
};

// Top-down finite tree transducer.
struct Ftt {
  RankedAlphabet input;
  RankedAlphabet output;
  std::vector<std::string> states;
  std::string initial;
  std::vector<FttRule> rules;

  void validate() const;
};

// Line format, alphabets inferred from the rules:
//   states p q
//   init p
//   p, a(x1,x2) -> a((p,x1),(q,x2))
//   p, a(x1,x2) -> (p,x1)
//   q, c -> c
//   q, x -> b((q,x))
Ftt parse_ftt(const std::string& text);
std::string to_string(const Ftt& a);

// No rule consumes the same variable twice.
bool is_linear(const Ftt& a);

// Every output of t of size <= size_bound.
std::set<Tree> apply_to_tree(const Ftt& a, const Tree& t, std::size_t size_bound);

// Automaton for the image a(L(b)) = { u : t in L(b), (t,u) in a }.
// Requires a linear.
Nfta apply_to_nfta(const Ftt& a, const Nfta& b);

// Image of every language is its downward closure: each node is either
// copied or replaced by the image of one of its children.
Ftt builder_downward(const RankedAlphabet& sigma);

// Copies its input while running r on it: image = L intersect L(r).
Ftt builder_intersect(const Nfta& r);

// Replaces every letter occurrence of the input, independently, by one of
// the marks diversify introduces for that letter; unmarking any output
// recovers the input.
Ftt builder_mark(const PreProduct& pure);

// On every branch that avoids the body root of some iterate of d, the leaf
// closing the branch may grow into an arbitrarily tall chain of that
// iterate's root letter; the remaining chain positions and the chain's end
// keep the letter of the replaced leaf.
Ftt builder_pad(const Diversified& d);

}  // namespace dcl
