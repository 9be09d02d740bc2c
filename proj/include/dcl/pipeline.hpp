#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dcl/cost.hpp"
#include "dcl/fta.hpp"
#include "dcl/ftt.hpp"
#include "dcl/schemes.hpp"
#include "dcl/stre.hpp"
#include "dcl/trees.hpp"

namespace dcl {

// Resource limits shared by the bounded stages of the pipeline.
struct Bounds {
  int size = 12;       // member size cap for enumerations
  int depth = 12;      // expansion depth for scheme handles
  long fuel = 100000;  // reduction fuel for scheme handles
  int n_max = 6;       // largeness threshold for bounded diagonal checks
};

// A language given exactly (automaton), generatively (scheme plus expansion
// bounds), or by listing its trees.  Every handle supports bounded
// enumeration; only exact handles support precise boolean reasoning.
struct LanguageHandle {
  enum class Kind { Exact, SchemeBounded, Finite };
  Kind kind = Kind::Finite;

  Nfta exact;            // Kind::Exact
  Scheme scheme;         // Kind::SchemeBounded
  std::set<Tree> trees;  // Kind::Finite
  RankedAlphabet sigma;  // alphabet for Kind::Finite
  Bounds bounds;         // enumeration limits

  static LanguageHandle from_nfta(Nfta a, Bounds b = {});
  static LanguageHandle from_scheme(Scheme g, Bounds b = {});
  static LanguageHandle from_trees(RankedAlphabet sigma, std::set<Tree> ts,
                                   Bounds b = {});

  bool is_exact() const { return kind == Kind::Exact; }
  RankedAlphabet alphabet() const;

  // Members up to size_bound (the handle's own bound when negative); the
  // flag reports completeness up to that size.
  EnumerationResult enumerate(int size_bound = -1) const;
};

// Three-valued verdict; the reason records the bounds that were in play.
struct TriState {
  enum class V { Yes, No, Unknown };
  V v = V::Unknown;
  std::string reason;

  static TriState yes(std::string why) { return {V::Yes, std::move(why)}; }
  static TriState no(std::string why) { return {V::No, std::move(why)}; }
  static TriState unknown(std::string why) {
    return {V::Unknown, std::move(why)};
  }
  std::string str() const;  // "yes" | "no" | "unknown"
};

// Is the language diagonal for sigma -- does it, for every n, contain a
// member with at least n occurrences of every sigma-letter on every branch?
// Checks n up to n_max against the enumerated members and reports the
// largest witnessed n; yes iff every n <= n_max is witnessed.  A plain
// semi-decision: verdicts are relative to the enumeration bounds.
std::pair<int, TriState> diagonal_bruteforce(const LanguageHandle& l,
                                             const std::set<Letter>& sigma,
                                             int n_max);

// Same question for an exact automaton: intersects L(b) with the regular
// set of n-large trees (per-branch counters capped at n) for n growing up
// to the threshold |states| * |sigma| + 1.  An empty intersection refutes
// diagonality outright; survival to the threshold is reported as yes, with
// the threshold a heuristic cut-off.  Verdicts at low n are cross-checked
// against the enumeration oracle.
TriState diagonal_regular(const Nfta& b, const std::set<Letter>& sigma);

// One-way alternating B-automaton over `alphabet` (which must designate nd
// and bottom letters) bounding the members cut out of a tree by resolving
// its nd-nodes: it (n-1)-accepts exactly when no member carries n
// occurrences of every tracked letter on every branch.  Game shape: Adam
// resolves nd-nodes; Eve tracks one letter (committing at the first
// non-nd node of a play), steers to a leaf and counts that letter, or bets
// the resolution is ill-formed -- hits bottom or never terminates -- in
// which case she stops counting and wins only if the bet is right.  Exact
// for a single tracked letter; with several, acceptance still certifies
// that no member is large, while rejection may be spurious because the
// letter is committed before all of Adam's resolutions are visible.
BAutomaton diagonal_automaton(const std::set<Letter>& letters,
                              const RankedAlphabet& alphabet);

// Does sup { n : some tree of L is n-large for d } diverge -- equivalently,
// is the full denotation of d's product below the downward closure of L?
// Requires L to be a subset of the denotation (verified exactly for exact
// handles, member by member otherwise; throws with a witness on failure).
// Intersects the closure of L with d's versatile trees, pads the result,
// and asks the diagonal question for the iterate root letters.
TriState sup_check(const Diversified& d, const LanguageHandle& l,
                   const Bounds& bounds);

// Emptiness through the sup reduction: a transducer ignoring its input and
// emitting unary ladders a(...a(e)...) has, over a nonempty language, an
// image whose closure is exactly the ladder product (a(#))*.e?(); over the
// empty language the image is empty.  Yes means empty.  Scheme handles are
// decided only when a member shows up within bounds.
TriState emptiness_via_sup(const LanguageHandle& l);

// Downward closure of a regular language, exactly: the image under the
// keep-or-drop transducer.
Nfta downward_closure_regular(const Nfta& b);

// Result of the closure search: a sum of pure products denoting the
// downward closure of the searched language, when one was found within the
// size bound, plus the verification transcript.
struct SearchOutcome {
  std::optional<Stre> candidate;
  TriState status;
  std::vector<std::string> transcript;
};

// Searches for a sum of pure products denoting the downward closure of L.
// Pure products are enumerated by size; each is admitted once its
// denotation provably sits inside the closure (checked through marking and
// sup_check), and the search stops when the admitted sum covers the
// closure.  Exact handles get exact verdicts; scheme handles are verified
// against enumerated members and flagged as such.
SearchOutcome downward_closure_search(const LanguageHandle& l,
                                      int stre_size_bound,
                                      const Bounds& bounds);

}  // namespace dcl
