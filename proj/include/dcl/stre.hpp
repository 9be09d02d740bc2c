#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcl/fta.hpp"
#include "dcl/trees.hpp"

namespace dcl {

// Simple tree regular expressions.  An expression denotes a downward-closed
// set of trees and is a sum (union) of pre-products:
//
//   S ::= P + ... + P          (empty sum = 0, denoting the empty set)
//   P ::= a?(S,...,S)          optional letter, one argument per child
//       | {C + ... + C}*.S     iterate a sum of contexts, finish with S
//   C ::= a(E,...,E)           context: each entry is a hole `#` or an S
//
// a?(S1,...,Sr) denotes the downward closure of the trees a(T1,...,Tr) with
// Ti drawn from Si; an iterate plugs context trees into each other's holes
// any number of times before finishing every remaining hole with the body.

struct PreProduct;

struct Stre {
  std::vector<PreProduct> sum;  // empty = 0

  bool is_zero() const { return sum.empty(); }
};

// One slot of a context: either the hole or a full expression.
struct ContextEntry {
  bool hole = false;
  Stre expr;  // meaningful when !hole
};

struct ContextExpr {
  Letter letter;
  std::vector<ContextEntry> entries;
};

struct PreProduct {
  enum class Kind { Optional, Iterate };
  Kind kind = Kind::Optional;

  // Optional: letter?(children)
  Letter letter;
  std::vector<Stre> children;

  // Iterate: {contexts}*.body
  std::vector<ContextExpr> contexts;
  Stre body;
};

bool operator==(const Stre& a, const Stre& b);
bool operator==(const PreProduct& a, const PreProduct& b);
bool operator==(const ContextExpr& a, const ContextExpr& b);
bool operator==(const ContextEntry& a, const ContextEntry& b);

// Concrete syntax: `0`, `a?(S, S)`, `(C)*.S` or `{C + C}*.S`, holes `#`,
// sums joined with `+`.  A sum used as an iterate body is parenthesized.
// to_string is the inverse of parse_stre.
Stre parse_stre(const std::string& text);
std::string to_string(const Stre& s);
std::string to_string(const PreProduct& p);

// Letters used by the expression, with their ranks; throws on an arity
// clash between two uses of the same letter.
RankedAlphabet stre_alphabet(const Stre& s);

// Compile to a tree automaton recognizing the denoted language: one state
// per subexpression, rules following the defining equations, iteration as a
// fixpoint state, and downward closure added last as child-skipping moves.
Nfta to_nfta(const Stre& s);

bool member(const Tree& t, const Stre& s);

// True iff the denotation of s1 is contained in that of s2.
bool stre_includes(const Stre& s1, const Stre& s2);

// One step of the simplification relation at the leftmost-innermost
// position, or nullopt when s is already normal.  Structural rules fire
// first; the absorption rules (dropping a summand or context whose
// denotation another one covers) only once no structural rule applies.
// Every step preserves the denotation.
std::optional<Stre> rewrite_step(const Stre& s);

// Rewrite to a normal form: a sum of products.
Stre normalize(const Stre& s);

// Products in normal form admit an equivalent pure product: every child is
// again a pure product (never 0, never a proper sum), every iterator is a
// nonempty sum of contexts each containing at least one hole.  Pure
// products denote nonempty sets.
bool is_pure_product(const PreProduct& p);

// Root label shared by all trees of a pure product's versatile set: the
// letter of an optional, or of the first context of an iterate.
Letter pure_root(const PreProduct& p);

// Convert a normal-form product into an equivalent pure product.  Throws
// if p is not normal (some rewrite step still applies).
PreProduct to_pure_product(const PreProduct& p);

// A pure product in which no letter occurs twice, together with the map
// from the fresh marks back to the letters they replaced.
struct Diversified {
  PreProduct product;
  std::map<Letter, Letter> original;  // mark -> letter it replaced
};

// Replace the i-th occurrence (left to right) of each letter a by a_i.
Diversified diversify(const PreProduct& pure);

// Automaton for the versatile trees of a diversified pure product: each
// iterate must complete a full round of its contexts in their listed order
// before finishing, and may then run further whole rounds; optionals lose
// their optionality.  The language is a subset of the denotation.
Nfta versatile_nfta(const Diversified& d);

// One versatile tree whose iterates all run `rounds` full rounds (at least
// one).  The result is rounds-large with respect to d.
Tree versatile_sample(const Diversified& d, int rounds);

// T is n-large when, for every iterate subexpression of d, every occurrence
// of the root of the iterate's body has at least n proper ancestors labeled
// with the root of the iterate itself.
bool is_n_large_wrt(const Tree& t, const Diversified& d, int n);

// Root letters of all iterate subexpressions of a pure product.
std::set<Letter> iterate_roots(const PreProduct& pure);

}  // namespace dcl
