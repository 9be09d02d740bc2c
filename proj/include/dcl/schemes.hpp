#pragma once

#include "dcl/trees.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dcl {

// Simple types over the ground type o, kept in spine form:
// {a1,...,ak} represents a1 -> a2 -> ... -> ak -> o.
struct SimpleType {
  std::vector<SimpleType> args;

  bool is_ground() const { return args.empty(); }
  int order() const;
  // Argument orders are non-increasing, recursively.
  bool homogeneous() const;
  bool operator==(const SimpleType&) const = default;
  std::string str() const;
};

SimpleType parse_type(const std::string& text);

struct LambdaTerm;
using TermPtr = std::shared_ptr<const LambdaTerm>;

// Finite lambda-terms. Scheme rule bodies are applicative (lambdas only as
// leading binders), but the type supports inner lambdas so standalone terms
// can be analysed too.
struct LambdaTerm {
  enum class Kind { Letter, Variable, Nonterminal, Lambda, Application };

  Kind kind;
  std::string name;          // letter / variable / nonterminal / binder name
  SimpleType type;           // variable or binder type
  bool unresolved = false;   // variable that no parameter binds
  TermPtr fun, arg;          // application
  TermPtr body;              // lambda
};

TermPtr mk_letter(std::string name);
TermPtr mk_variable(std::string name, SimpleType type);
TermPtr mk_unresolved(std::string name);
TermPtr mk_nonterminal(std::string name);
TermPtr mk_lambda(std::string binder, SimpleType type, TermPtr body);
TermPtr mk_application(TermPtr fun, TermPtr arg);

std::string to_string(const LambdaTerm& t);

struct Scheme {
  RankedAlphabet alphabet;
  // Declaration order matters for deterministic printing and reports.
  std::vector<std::pair<std::string, SimpleType>> nonterminals;
  std::string initial;
  std::map<std::string, TermPtr> rules;  // name -> lambda-wrapped rule term

  const SimpleType* nonterminal_type(const std::string& name) const;
  // Structural invariants: declared initial of ground type, a rule per
  // nonterminal, applicative bodies, no bare-nonterminal bodies.
  void validate() const;
};

Scheme parse_scheme(const std::string& text);
std::string to_string(const Scheme& g);

// Type of a term whose variables carry their own types. Throws Error with a
// path into the term on failure. `g` supplies nonterminal types and letter
// ranks; it may be null for terms without nonterminals (letter ranks are then
// taken from applied arity... not available, so letters require `g`).
SimpleType infer_type(const LambdaTerm& t, const Scheme* g);

// Throws Error (mentioning rule and term path) unless every rule matches its
// declared nonterminal type.
void typecheck(const Scheme& g);

struct SafetyReport {
  bool safe = true;
  std::string rule;      // offending rule, when checking a scheme
  std::string variable;  // offending free variable
  std::string path;      // dot-joined child indices of the offending subterm
  std::string detail;
};

// A term is superficially safe when every free variable has order >= the
// term's order; it is safe when it is superficially safe and in every
// application K L1...Lk (K not itself an application) all of K, L1, ..., Lk
// are superficially safe. Nonterminals and letters are closed constants and
// never count as free variables.
SafetyReport check_safety_term(const TermPtr& t, const Scheme* g = nullptr);
SafetyReport check_safety(const Scheme& g);

int scheme_order(const Scheme& g);

// Fueled head-reduction prefix of the tree generated by `g`. `depth` bounds
// the number of nonterminal unfoldings along any root-to-leaf path: a leaf
// turns into `unknown` where the next unfolding would exceed the bound or
// step_fuel runs out, and into `bot` where head reduction provably loops
// (revisits a machine configuration without emitting a letter).
Tree bohm_prefix(const Scheme& g, int depth, long step_fuel = 100000);

struct EnumerationResult {
  std::set<Tree> members;
  bool saturated = false;  // no unknown leaf can add a member within bound
};

EnumerationResult language_enumerate(const Scheme& g, int size_bound, int depth,
                                     long step_fuel = 100000);

}  // namespace dcl
