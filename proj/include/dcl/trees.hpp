#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcl {

using Letter = std::string;

// Reserved label names shared by all file formats.
inline constexpr const char* kHole = "#";         // context hole, rank 0
inline constexpr const char* kBottom = "bot";     // proven dead end
inline constexpr const char* kUnknown = "unknown"; // undecided prefix cut

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error {
  ParseError(const std::string& what, int line = -1);
  int line;
};

class RankedAlphabet {
public:
  RankedAlphabet() = default;

  void add(const Letter& a, int rank);
  bool contains(const Letter& a) const { return ranks_.count(a) != 0; }
  int rank(const Letter& a) const;
  const std::map<Letter, int>& letters() const { return ranks_; }

  // Distinguished letters, if the alphabet declares them.
  std::optional<Letter> nd;      // nondeterministic choice, rank 2
  std::optional<Letter> bottom;  // divergence, rank 0

  void validate() const;  // nd/bottom ranks, hole not a letter

private:
  std::map<Letter, int> ranks_;
};

struct Tree {
  Letter label;
  std::vector<Tree> children;

  Tree() = default;
  explicit Tree(Letter l) : label(std::move(l)) {}
  Tree(Letter l, std::vector<Tree> cs) : label(std::move(l)), children(std::move(cs)) {}

  std::size_t size() const;
  std::size_t depth() const;  // single node = 1
  bool operator==(const Tree&) const = default;
  bool operator<(const Tree& o) const;  // label, then children lexicographically
};

// a(b,c(d)) etc.  Rank-0 children may omit parentheses.
Tree parse_tree(const std::string& text);
std::string to_string(const Tree& t);

// Labels used in t, with their observed ranks; throws on inconsistent use.
std::map<Letter, int> observed_letters(const Tree& t);

// Union of two alphabets.  Conflicting ranks for a shared letter throw.
RankedAlphabet merge_alphabets(const RankedAlphabet& a, const RankedAlphabet& b);

// Homeomorphic embedding: s embeds into t by either descending into one
// child of t, or matching the root label and embedding childwise.
bool embeds(const Tree& s, const Tree& t);

// Downward closure membership helper: true iff some member of `hay`
// admits `needle` as an embedded tree.
bool embeds_into_any(const Tree& needle, const std::set<Tree>& hay);

// Replace every occurrence of the hole label in c, independently per
// occurrence, by trees drawn from fill.  A hole-free c yields {c}.
std::set<Tree> substitute(const Tree& c, const std::set<Tree>& fill);

std::size_t count_holes(const Tree& c);

// Every root-to-leaf branch carries >= n occurrences of every letter in sigma.
bool branch_count_ok(const Tree& t, const std::set<Letter>& sigma, std::size_t n);

// All nd-free, bottom-free finite trees reachable from the prefix t by
// resolving nd nodes to one child, of size <= size_bound.  Resolutions that
// would pass through an `unknown` cut are not emitted.
std::set<Tree> nd_resolutions(const Tree& t, std::size_t size_bound,
                              const Letter& nd = "nd",
                              const Letter& bottom = kBottom,
                              const Letter& unknown = kUnknown);

// Finitely-branching infinite trees as equation systems:
//   root S
//   S = a(S, T)
//   T = c
struct RegularTree {
  struct Node {
    Letter label;
    std::vector<std::string> children;  // names of other equations
  };
  std::string root;
  std::map<std::string, Node> equations;

  void validate() const;  // every referenced name defined, ranks consistent
  const Node& at(const std::string& name) const;
  // Unfold to a finite prefix; cut nodes become `unknown` leaves.
  Tree prefix(std::size_t depth) const;
  std::map<Letter, int> letters() const;
};

RegularTree parse_regular_tree(const std::string& text);
std::string to_string(const RegularTree& rt);

}  // namespace dcl
