#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcl/trees.hpp"

namespace dcl {

// Nondeterministic bottom-up finite tree automaton.
struct Nfta {
  RankedAlphabet alphabet;
  std::vector<std::string> state_names;          // index = state id
  std::set<int> final_states;
  // per letter: list of (child states, target state)
  std::map<Letter, std::vector<std::pair<std::vector<int>, int>>> rules;

  int add_state(const std::string& name);
  int num_states() const { return static_cast<int>(state_names.size()); }
  void add_rule(const Letter& a, std::vector<int> children, int target);
  void validate() const;
};

Nfta parse_nfta(const std::string& text);
std::string to_string(const Nfta& a);

bool member(const Nfta& a, const Tree& t);
bool is_empty(const Nfta& a);
// Some witness accepted tree, if any (smallest-first search).
std::optional<Tree> witness(const Nfta& a);

Nfta product(const Nfta& a, const Nfta& b);       // intersection
Nfta union_of(const Nfta& a, const Nfta& b);
Nfta determinize(const Nfta& a);                   // complete DFTA, subset states
Nfta complement(const Nfta& a);

// L(inner) subseteq L(outer).
bool includes(const Nfta& outer, const Nfta& inner);
bool equivalent(const Nfta& a, const Nfta& b);

// Accepts exactly the given finite set of trees.
Nfta nfta_for_trees(const RankedAlphabet& sigma, const std::set<Tree>& trees);

// Accepts every tree over sigma.
Nfta nfta_all(const RankedAlphabet& sigma);

// Enumerate accepted trees of size <= size_bound.
std::set<Tree> enumerate_members(const Nfta& a, std::size_t size_bound);

}  // namespace dcl
