#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dcl/trees.hpp"

namespace dcl {

// --- Counter actions --------------------------------------------------------

enum class CounterOp { Inc, Reset, Skip };
using CounterAction = std::vector<CounterOp>;  // one op per counter

// Supremum of the counter values along a finite action word. Counters start
// at zero; with several counters the maximal one counts.
long val(const std::vector<CounterAction>& word);

// Value of the infinite word prefix-cycle-cycle-...; nullopt encodes infinity
// (some counter is incremented in the cycle but never reset there). Counter
// values entering the cycle are stable from the second pass on, so the finite
// case is the supremum over the prefix plus two cycle unfoldings.
std::optional<long> val(const std::vector<CounterAction>& prefix,
                        const std::vector<CounterAction>& cycle);

// --- Alternating two-way B-automata -----------------------------------------

// Directions: kUp, kStay, or a 1-based child index.
constexpr int kUp = -1;
constexpr int kStay = 0;

struct Move {
  int direction = kStay;
  CounterAction action;
  std::string state;
  bool operator==(const Move&) const = default;
};
using Conjunct = std::vector<Move>;  // Adam resolves: picks one move
using Dnf = std::vector<Conjunct>;   // Eve resolves: picks one conjunct

// Acceptance game: Eve picks a disjunct of delta(state, letter), Adam picks a
// move of it; a play is accepting when the maximal priority seen infinitely
// often is even, and its value is the supremum of the counter values. At the
// root Eve may not pick a disjunct containing an `up` move, so every entry
// must offer at least one up-free disjunct.
struct BAutomaton {
  RankedAlphabet alphabet;
  std::vector<std::pair<std::string, int>> states;  // (name, priority)
  std::string initial;
  int counters = 0;
  std::map<std::pair<std::string, Letter>, Dnf> delta;

  bool has_state(const std::string& name) const;
  int priority(const std::string& name) const;
  bool one_way() const;  // no transition uses `up`
  void validate() const;
};

BAutomaton parse_bautomaton(const std::string& text);
std::string to_string(const BAutomaton& a);

// --- Acceptance games over regular trees ------------------------------------

// Finite arena for a one-way automaton on a regular tree: positions pair an
// equation name with a state, plus pending positions where Adam resolves the
// disjunct Eve just picked. Priorities sit on positions (the state's priority
// at Eve positions, 0 at pending ones); counter actions sit on Adam's edges.
struct GameArena {
  struct Position {
    std::string name;
    std::string state;
    int disjunct = -1;  // -1: Eve picks a disjunct; else Adam picks a move
    int priority = 0;
    bool eve = true;
  };
  struct Edge {
    int target = 0;
    CounterAction action;  // empty on Eve -> pending edges
  };
  std::vector<Position> positions;
  std::vector<std::vector<Edge>> moves;  // outgoing edges per position
  int initial = 0;
  int counters = 0;
};

// One-way automata only; `stay` loops stay within the same equation name.
// Errors when the automaton uses `up`, when a tree letter is missing from the
// automaton alphabet, or when some (state, tree letter) entry is absent.
GameArena build_arena(const BAutomaton& a, const RegularTree& t);

// True iff Eve has a strategy keeping every counter <= n and making the
// maximal priority seen infinitely often even. Exact: counter valuations are
// expanded into the positions, capped at n+1 (reaching n+1 loses for Eve),
// and the finite parity game is solved by attractor decomposition.
bool n_wins(const GameArena& arena, int n);

struct BoundedResult {
  enum class Kind { AcceptedAt, RejectedUpTo, Unknown };
  Kind kind = Kind::Unknown;
  int bound = 0;  // the n of accepted_at(n) / rejected_up_to(n_max)
  bool operator==(const BoundedResult&) const = default;
  std::string str() const;
};

// Smallest n <= n_max with n_wins, if any. Exact for one-way automata. For
// two-way automata the game has no finite arena (positions depend on the
// path), so a fuel-bounded minimax explores path-extended positions and may
// return unknown; its definite verdicts are sound.
BoundedResult accepts_bounded(const BAutomaton& a, const RegularTree& t,
                              int n_max, long fuel = 100000);

}  // namespace dcl
