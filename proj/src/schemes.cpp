#include "dcl/schemes.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

namespace dcl {

// ---------------------------------------------------------------------------
// Simple types

int SimpleType::order() const {
  int best = -1;
  for (const auto& a : args) best = std::max(best, a.order());
  return best + 1;
}

bool SimpleType::homogeneous() const {
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i].order() < args[i + 1].order()) return false;
  for (const auto& a : args)
    if (!a.homogeneous()) return false;
  return true;
}

std::string SimpleType::str() const {
  std::string out;
  for (const auto& a : args) {
    if (a.is_ground())
      out += "o->";
    else
      out += "(" + a.str() + ")->";
  }
  out += "o";
  return out;
}

namespace {

struct TypeParser {
  std::string s;  // whitespace already removed
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) {
    throw Error("bad type '" + s + "': " + msg);
  }

  SimpleType parse_atom() {
    if (pos < s.size() && s[pos] == 'o') {
      ++pos;
      return SimpleType{};
    }
    if (pos < s.size() && s[pos] == '(') {
      ++pos;
      SimpleType t = parse_arrow();
      if (pos >= s.size() || s[pos] != ')') fail("missing ')'");
      ++pos;
      return t;
    }
    fail("expected 'o' or '('");
  }

  SimpleType parse_arrow() {
    std::vector<SimpleType> parts{parse_atom()};
    while (pos + 1 < s.size() && s[pos] == '-' && s[pos + 1] == '>') {
      pos += 2;
      parts.push_back(parse_atom());
    }
    SimpleType result = std::move(parts.back());
    parts.pop_back();
    // Right-associativity: a1 -> ... -> an -> result flattens into the
    // result's argument spine.
    std::vector<SimpleType> args = std::move(parts);
    for (auto& a : result.args) args.push_back(std::move(a));
    result.args = std::move(args);
    return result;
  }
};

}  // namespace

SimpleType parse_type(const std::string& text) {
  std::string compact;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
  if (compact.empty()) throw Error("empty type");
  TypeParser p{compact};
  SimpleType t = p.parse_arrow();
  if (p.pos != p.s.size()) p.fail("trailing input");
  return t;
}

// ---------------------------------------------------------------------------
// Terms

TermPtr mk_letter(std::string name) {
  auto t = std::make_shared<LambdaTerm>();
  t->kind = LambdaTerm::Kind::Letter;
  t->name = std::move(name);
  return t;
}

TermPtr mk_variable(std::string name, SimpleType type) {
  auto t = std::make_shared<LambdaTerm>();
  t->kind = LambdaTerm::Kind::Variable;
  t->name = std::move(name);
  t->type = std::move(type);
  return t;
}

TermPtr mk_unresolved(std::string name) {
  auto t = std::make_shared<LambdaTerm>();
  t->kind = LambdaTerm::Kind::Variable;
  t->name = std::move(name);
  t->unresolved = true;
  return t;
}

TermPtr mk_nonterminal(std::string name) {
  auto t = std::make_shared<LambdaTerm>();
  t->kind = LambdaTerm::Kind::Nonterminal;
  t->name = std::move(name);
  return t;
}

TermPtr mk_lambda(std::string binder, SimpleType type, TermPtr body) {
  auto t = std::make_shared<LambdaTerm>();
  t->kind = LambdaTerm::Kind::Lambda;
  t->name = std::move(binder);
  t->type = std::move(type);
  t->body = std::move(body);
  return t;
}

TermPtr mk_application(TermPtr fun, TermPtr arg) {
  auto t = std::make_shared<LambdaTerm>();
  t->kind = LambdaTerm::Kind::Application;
  t->fun = std::move(fun);
  t->arg = std::move(arg);
  return t;
}

namespace {

void print_term(const LambdaTerm& t, std::string& out, bool parenthesize) {
  switch (t.kind) {
    case LambdaTerm::Kind::Letter:
    case LambdaTerm::Kind::Variable:
    case LambdaTerm::Kind::Nonterminal:
      out += t.name;
      return;
    case LambdaTerm::Kind::Lambda:
      if (parenthesize) out += "(";
      out += "\\" + t.name + ". ";
      print_term(*t.body, out, false);
      if (parenthesize) out += ")";
      return;
    case LambdaTerm::Kind::Application: {
      if (parenthesize) out += "(";
      print_term(*t.fun, out, t.fun->kind == LambdaTerm::Kind::Lambda);
      out += " ";
      print_term(*t.arg, out,
                 t.arg->kind == LambdaTerm::Kind::Application ||
                     t.arg->kind == LambdaTerm::Kind::Lambda);
      if (parenthesize) out += ")";
      return;
    }
  }
}

}  // namespace

std::string to_string(const LambdaTerm& t) {
  std::string out;
  print_term(t, out, false);
  return out;
}

// ---------------------------------------------------------------------------
// Schemes: structure, parsing, printing

const SimpleType* Scheme::nonterminal_type(const std::string& name) const {
  for (const auto& [n, t] : nonterminals)
    if (n == name) return &t;
  return nullptr;
}

namespace {

bool body_has_inner_lambda(const LambdaTerm& t) {
  switch (t.kind) {
    case LambdaTerm::Kind::Lambda:
      return true;
    case LambdaTerm::Kind::Application:
      return body_has_inner_lambda(*t.fun) || body_has_inner_lambda(*t.arg);
    default:
      return false;
  }
}

}  // namespace

void Scheme::validate() const {
  alphabet.validate();
  if (nonterminals.empty()) throw Error("scheme has no nonterminals");
  std::set<std::string> names;
  for (const auto& [n, t] : nonterminals) {
    if (!names.insert(n).second) throw Error("duplicate nonterminal " + n);
    if (alphabet.contains(n)) throw Error("nonterminal " + n + " clashes with a letter");
    (void)t;
  }
  const SimpleType* t0 = nonterminal_type(initial);
  if (t0 == nullptr) throw Error("initial nonterminal " + initial + " is not declared");
  if (!t0->is_ground()) throw Error("initial nonterminal " + initial + " must have type o");
  for (const auto& [n, unused] : nonterminals) {
    (void)unused;
    if (!rules.count(n)) throw Error("nonterminal " + n + " has no rule");
  }
  for (const auto& [n, rule] : rules) {
    if (!names.count(n)) throw Error("rule for undeclared nonterminal " + n);
    const LambdaTerm* body = rule.get();
    while (body->kind == LambdaTerm::Kind::Lambda) body = body->body.get();
    if (body->kind == LambdaTerm::Kind::Nonterminal)
      throw Error("rule body of " + n + " is a bare nonterminal");
    if (body_has_inner_lambda(*body))
      throw Error("rule body of " + n + " contains an inner lambda");
  }
}

namespace {

struct RuleTermParser {
  const std::string& line;
  std::size_t pos;
  int line_no;
  const Scheme& g;
  const std::map<std::string, SimpleType>& params;

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, line_no); }

  void skip_ws() {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
  }

  bool ident_char(char c) const {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }

  std::string ident() {
    std::size_t start = pos;
    while (pos < line.size() && ident_char(line[pos])) ++pos;
    if (pos == start) fail("expected an identifier");
    return line.substr(start, pos - start);
  }

  TermPtr atom() {
    skip_ws();
    if (pos >= line.size()) fail("unexpected end of rule");
    if (line[pos] == '(') {
      ++pos;
      TermPtr t = expr();
      skip_ws();
      if (pos >= line.size() || line[pos] != ')') fail("missing ')'");
      ++pos;
      return t;
    }
    std::string name = ident();
    if (g.alphabet.contains(name)) return mk_letter(name);
    if (g.nonterminal_type(name) != nullptr) return mk_nonterminal(name);
    auto it = params.find(name);
    if (it != params.end()) return mk_variable(name, it->second);
    return mk_unresolved(name);
  }

  bool at_atom() {
    skip_ws();
    return pos < line.size() && (line[pos] == '(' || ident_char(line[pos]));
  }

  TermPtr expr() {
    TermPtr t = atom();
    while (at_atom()) t = mk_application(std::move(t), atom());
    return t;
  }
};

std::string strip_comment(const std::string& line) {
  auto p = line.find("--");
  return p == std::string::npos ? line : line.substr(0, p);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

Scheme parse_scheme(const std::string& text) {
  Scheme g;
  std::vector<std::pair<int, std::string>> rule_lines;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool saw_start = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = strip_comment(raw);
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "letters") {
      for (std::size_t i = 1; i < toks.size(); ++i) {
        auto slash = toks[i].find('/');
        if (slash == std::string::npos)
          throw ParseError("letter declaration needs name/rank", line_no);
        std::string name = toks[i].substr(0, slash);
        int rank = 0;
        try {
          rank = std::stoi(toks[i].substr(slash + 1));
        } catch (const std::exception&) {
          throw ParseError("bad rank for letter " + name, line_no);
        }
        try {
          g.alphabet.add(name, rank);
        } catch (const Error& e) {
          throw ParseError(e.what(), line_no);
        }
      }
    } else if (toks[0] == "types") {
      if (toks.size() < 3 || toks[2] != ":")
        throw ParseError("expected 'types NAME : TYPE'", line_no);
      std::string name = toks[1];
      if (g.nonterminal_type(name) != nullptr)
        throw ParseError("duplicate type declaration for " + name, line_no);
      std::string type_text;
      for (std::size_t i = 3; i < toks.size(); ++i) type_text += toks[i];
      try {
        g.nonterminals.emplace_back(name, parse_type(type_text));
      } catch (const Error& e) {
        throw ParseError(e.what(), line_no);
      }
    } else if (toks[0] == "start") {
      if (toks.size() != 2) throw ParseError("expected 'start NAME'", line_no);
      g.initial = toks[1];
      saw_start = true;
    } else {
      rule_lines.emplace_back(line_no, line);
    }
  }
  if (!saw_start) throw ParseError("missing 'start' line", line_no);

  for (const auto& [no, line] : rule_lines) {
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("rule line without '='", no);
    auto lhs = split_ws(line.substr(0, eq));
    if (lhs.empty()) throw ParseError("rule line without a nonterminal", no);
    std::string name = lhs[0];
    const SimpleType* type = g.nonterminal_type(name);
    if (type == nullptr) throw ParseError("rule for undeclared nonterminal " + name, no);
    if (g.rules.count(name)) throw ParseError("duplicate rule for " + name, no);
    std::size_t arity = lhs.size() - 1;
    if (arity > type->args.size())
      throw ParseError("rule for " + name + " binds more parameters than its type has",
                       no);
    std::map<std::string, SimpleType> params;
    for (std::size_t i = 0; i < arity; ++i) {
      if (!params.emplace(lhs[i + 1], type->args[i]).second)
        throw ParseError("duplicate parameter " + lhs[i + 1], no);
    }
    RuleTermParser p{line, eq + 1, no, g, params};
    TermPtr body = p.expr();
    p.skip_ws();
    if (p.pos != line.size()) p.fail("trailing input after rule body");
    for (std::size_t i = arity; i-- > 0;)
      body = mk_lambda(lhs[i + 1], type->args[i], std::move(body));
    g.rules.emplace(name, std::move(body));
  }
  g.validate();
  return g;
}

std::string to_string(const Scheme& g) {
  std::string out = "letters";
  for (const auto& [name, rank] : g.alphabet.letters())
    out += " " + name + "/" + std::to_string(rank);
  out += "\n";
  for (const auto& [name, type] : g.nonterminals)
    out += "types " + name + " : " + type.str() + "\n";
  out += "start " + g.initial + "\n";
  for (const auto& [name, unused] : g.nonterminals) {
    (void)unused;
    auto it = g.rules.find(name);
    if (it == g.rules.end()) continue;
    out += name;
    const LambdaTerm* t = it->second.get();
    while (t->kind == LambdaTerm::Kind::Lambda) {
      out += " " + t->name;
      t = t->body.get();
    }
    out += " = " + to_string(*t) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Typechecking

namespace {

SimpleType letter_type(const RankedAlphabet& alphabet, const std::string& name) {
  SimpleType t;
  t.args.assign(static_cast<std::size_t>(alphabet.rank(name)), SimpleType{});
  return t;
}

struct TypeChecker {
  const Scheme* g;

  [[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw Error("at " + (path.empty() ? std::string("<root>") : path) + ": " + msg);
  }

  SimpleType infer(const LambdaTerm& t, const std::string& path) {
    switch (t.kind) {
      case LambdaTerm::Kind::Letter:
        if (g == nullptr || !g->alphabet.contains(t.name))
          fail(path, "unknown letter " + t.name);
        return letter_type(g->alphabet, t.name);
      case LambdaTerm::Kind::Variable:
        if (t.unresolved) fail(path, "unbound variable " + t.name);
        return t.type;
      case LambdaTerm::Kind::Nonterminal: {
        const SimpleType* ty = g ? g->nonterminal_type(t.name) : nullptr;
        if (ty == nullptr) fail(path, "unknown nonterminal " + t.name);
        return *ty;
      }
      case LambdaTerm::Kind::Lambda: {
        SimpleType body = infer(*t.body, path.empty() ? "0" : path + ".0");
        SimpleType out;
        out.args.push_back(t.type);
        for (auto& a : body.args) out.args.push_back(std::move(a));
        return out;
      }
      case LambdaTerm::Kind::Application: {
        SimpleType tf = infer(*t.fun, path.empty() ? "0" : path + ".0");
        SimpleType ta = infer(*t.arg, path.empty() ? "1" : path + ".1");
        if (tf.is_ground())
          fail(path, "cannot apply '" + to_string(*t.fun) + "' of type o");
        if (!(ta == tf.args.front()))
          fail(path.empty() ? "1" : path + ".1",
               "argument '" + to_string(*t.arg) + "' has type " + ta.str() +
                   ", expected " + tf.args.front().str());
        SimpleType out;
        out.args.assign(tf.args.begin() + 1, tf.args.end());
        return out;
      }
    }
    fail(path, "corrupt term");
  }
};

}  // namespace

SimpleType infer_type(const LambdaTerm& t, const Scheme* g) {
  TypeChecker tc{g};
  return tc.infer(t, "");
}

void typecheck(const Scheme& g) {
  g.validate();
  for (const auto& [name, type] : g.nonterminals) {
    const TermPtr& rule = g.rules.at(name);
    SimpleType got;
    try {
      got = infer_type(*rule, &g);
    } catch (const Error& e) {
      throw Error("rule " + name + ": " + e.what());
    }
    if (!(got == type))
      throw Error("rule " + name + ": declared type " + type.str() +
                  " but the rule has type " + got.str());
  }
}

// ---------------------------------------------------------------------------
// Safety

namespace {

// Free genuine variables of a term with their orders; bound names are tracked
// through a multiset so shadowing works.
void free_variables(const LambdaTerm& t, std::map<std::string, int>& bound,
                    std::map<std::string, int>& out) {
  switch (t.kind) {
    case LambdaTerm::Kind::Letter:
    case LambdaTerm::Kind::Nonterminal:
      return;
    case LambdaTerm::Kind::Variable: {
      auto it = bound.find(t.name);
      if (it != bound.end() && it->second > 0) return;
      out.emplace(t.name, t.type.order());
      return;
    }
    case LambdaTerm::Kind::Lambda: {
      ++bound[t.name];
      free_variables(*t.body, bound, out);
      --bound[t.name];
      return;
    }
    case LambdaTerm::Kind::Application:
      free_variables(*t.fun, bound, out);
      free_variables(*t.arg, bound, out);
      return;
  }
}

struct SafetyChecker {
  const Scheme* g;
  SafetyReport report;

  // Superficial safety of the subterm at `path`; records the first violation.
  bool superficially_safe(const LambdaTerm& t, const std::string& path) {
    int term_order = infer_type(t, g).order();
    std::map<std::string, int> bound, free;
    free_variables(t, bound, free);
    for (const auto& [name, order] : free) {
      if (order < term_order) {
        report.safe = false;
        report.variable = name;
        report.path = path;
        report.detail = "variable " + name + " of order " + std::to_string(order) +
                        " occurs free in a subterm of order " +
                        std::to_string(term_order);
        return false;
      }
    }
    return true;
  }

  bool walk(const LambdaTerm& t, const std::string& path) {
    if (t.kind == LambdaTerm::Kind::Application) {
      if (t.fun->kind != LambdaTerm::Kind::Application &&
          !superficially_safe(*t.fun, path.empty() ? "0" : path + ".0"))
        return false;
      if (!superficially_safe(*t.arg, path.empty() ? "1" : path + ".1")) return false;
      if (!walk(*t.fun, path.empty() ? "0" : path + ".0")) return false;
      if (!walk(*t.arg, path.empty() ? "1" : path + ".1")) return false;
      return true;
    }
    if (t.kind == LambdaTerm::Kind::Lambda)
      return walk(*t.body, path.empty() ? "0" : path + ".0");
    return true;
  }

  bool run(const LambdaTerm& t) { return superficially_safe(t, "") && walk(t, ""); }
};

}  // namespace

SafetyReport check_safety_term(const TermPtr& t, const Scheme* g) {
  SafetyChecker checker{g, {}};
  checker.run(*t);
  return checker.report;
}

SafetyReport check_safety(const Scheme& g) {
  for (const auto& [name, unused] : g.nonterminals) {
    (void)unused;
    SafetyReport r = check_safety_term(g.rules.at(name), &g);
    if (!r.safe) {
      r.rule = name;
      return r;
    }
  }
  return {};
}

int scheme_order(const Scheme& g) {
  int best = 0;
  for (const auto& [name, type] : g.nonterminals) {
    (void)name;
    best = std::max(best, type.order());
  }
  return best;
}

// ---------------------------------------------------------------------------
// Böhm-tree evaluation: a Krivine-style machine over hash-consed closures.

namespace {

struct Machine {
  const Scheme& g;
  long fuel;
  TermPtr root_term;

  struct Closure {
    const LambdaTerm* term;
    int env;
  };
  struct EnvBinding {
    int parent;
    std::string name;
    int clos;
    int order;
  };

  std::vector<Closure> closures;
  std::map<std::pair<const LambdaTerm*, int>, int> closure_ids;
  std::vector<EnvBinding> envs;
  std::map<std::tuple<int, std::string, int>, int> env_ids;

  explicit Machine(const Scheme& scheme, long step_fuel)
      : g(scheme), fuel(step_fuel), root_term(mk_nonterminal(scheme.initial)) {}

  int lookup(int env, const std::string& name) const {
    while (env >= 0) {
      if (envs[env].name == name) return envs[env].clos;
      env = envs[env].parent;
    }
    throw Error("internal: unbound variable " + name + " during evaluation");
  }

  int intern_closure(const LambdaTerm* t, int env) {
    // A closure over a variable is just whatever the variable is bound to;
    // resolving here keeps machine states canonical, so genuine loops are
    // recognisable as exact state revisits.
    while (t->kind == LambdaTerm::Kind::Variable) {
      int resolved = lookup(env, t->name);
      t = closures[resolved].term;
      env = closures[resolved].env;
      if (t->kind != LambdaTerm::Kind::Variable) {
        auto key = std::make_pair(t, env);
        auto it = closure_ids.find(key);
        if (it != closure_ids.end()) return it->second;
        int id = static_cast<int>(closures.size());
        closures.push_back({t, env});
        closure_ids.emplace(key, id);
        return id;
      }
    }
    auto key = std::make_pair(t, env);
    auto it = closure_ids.find(key);
    if (it != closure_ids.end()) return it->second;
    int id = static_cast<int>(closures.size());
    closures.push_back({t, env});
    closure_ids.emplace(key, id);
    return id;
  }

  int intern_env(int parent, const std::string& name, int clos, int order) {
    auto key = std::make_tuple(parent, name, clos);
    auto it = env_ids.find(key);
    if (it != env_ids.end()) return it->second;
    int id = static_cast<int>(envs.size());
    envs.push_back({parent, name, clos, order});
    env_ids.emplace(key, id);
    return id;
  }

  struct Config {
    int closure = -1;
    std::vector<int> stack;  // argument closures, innermost argument last
  };

  struct HeadResult {
    enum class Kind { Emit, Unknown, Bot } kind;
    std::string letter;
    std::vector<int> args;  // left to right
    int depth_left = 0;
    Config at;
  };

  HeadResult head_eval(int closure, int depth_left) {
    int cur = closure;
    std::vector<int> stack;
    std::set<std::pair<int, std::vector<int>>> seen;
    for (;;) {
      if (fuel-- <= 0) return {HeadResult::Kind::Unknown, "", {}, 0, {cur, stack}};
      const LambdaTerm* t = closures[cur].term;
      int env = closures[cur].env;
      switch (t->kind) {
        case LambdaTerm::Kind::Application:
          stack.push_back(intern_closure(t->arg.get(), env));
          cur = intern_closure(t->fun.get(), env);
          break;
        case LambdaTerm::Kind::Lambda: {
          if (stack.empty())
            throw Error("internal: head reduction reached an unapplied lambda");
          int arg = stack.back();
          stack.pop_back();
          int env2 = intern_env(env, t->name, arg, t->type.order());
          cur = intern_closure(t->body.get(), env2);
          break;
        }
        case LambdaTerm::Kind::Variable:
          cur = intern_closure(t, env);  // resolves through the environment
          break;
        case LambdaTerm::Kind::Nonterminal: {
          if (!seen.insert({cur, stack}).second)
            return {HeadResult::Kind::Bot, "", {}, 0, {}};
          if (depth_left == 0)
            return {HeadResult::Kind::Unknown, "", {}, 0, {cur, stack}};
          --depth_left;
          cur = intern_closure(g.rules.at(t->name).get(), -1);
          break;
        }
        case LambdaTerm::Kind::Letter: {
          std::size_t rank = static_cast<std::size_t>(g.alphabet.rank(t->name));
          if (stack.size() != rank)
            throw Error("internal: letter " + t->name + " applied to " +
                        std::to_string(stack.size()) + " arguments");
          std::vector<int> args(stack.rbegin(), stack.rend());
          return {HeadResult::Kind::Emit, t->name, args, depth_left, {}};
        }
      }
    }
  }

  struct EvalOut {
    Tree tree;
    // Unknown leaves, as (path into tree, machine configuration).
    std::vector<std::pair<std::vector<int>, Config>> unknowns;
  };

  std::map<std::pair<int, int>, EvalOut> memo;

  const EvalOut& eval_node(int closure, int depth_left) {
    auto key = std::make_pair(closure, depth_left);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    HeadResult h = head_eval(closure, depth_left);
    EvalOut out;
    switch (h.kind) {
      case HeadResult::Kind::Bot:
        out.tree = Tree(kBottom);
        break;
      case HeadResult::Kind::Unknown:
        out.tree = Tree(kUnknown);
        out.unknowns.push_back({{}, h.at});
        break;
      case HeadResult::Kind::Emit: {
        out.tree.label = h.letter;
        for (std::size_t i = 0; i < h.args.size(); ++i) {
          const EvalOut& child = eval_node(h.args[i], h.depth_left);
          out.tree.children.push_back(child.tree);
          for (const auto& [path, config] : child.unknowns) {
            std::vector<int> full{static_cast<int>(i)};
            full.insert(full.end(), path.begin(), path.end());
            out.unknowns.push_back({full, config});
          }
        }
        break;
      }
    }
    return memo.emplace(key, std::move(out)).first->second;
  }

  const EvalOut& run(int depth) {
    int root = intern_closure(root_term.get(), -1);
    return eval_node(root, depth);
  }
};

}  // namespace

Tree bohm_prefix(const Scheme& g, int depth, long step_fuel) {
  Machine m(g, step_fuel);
  return m.run(depth).tree;
}

// ---------------------------------------------------------------------------
// Language enumeration with a saturation analysis.
//
// The enumerator resolves the evaluated prefix; the saturation flag then asks
// whether any `unknown` leaf could still contribute a member within the size
// bound. For that we need the minimal member size reachable from each unknown
// machine configuration. Sizes come from a Bellman-style iteration over
// abstracted configurations: order-0 environment entries collapse to their
// (capped) minimal member sizes, which keeps the abstract state space finite,
// while higher-order entries stay as abstract closures. Every configuration
// starts at the cap ("no member found yet") and values only decrease; after a
// full round with no value changes, no new configurations, and stable seeds,
// the values are exactly the minimal derivation sizes (capped). If the
// iteration is cut off before that point, the values may still be inflated,
// so the analysis reports failure and the result errs toward "unsaturated".

namespace {

struct MsizeAnalysis {
  const Machine& m;
  const Scheme& g;
  int cap;          // size_bound + 1: anything at or above cannot matter
  long step_budget; // total abstract machine steps before giving up
  bool failed = false;

  std::map<const LambdaTerm*, int> order_memo;

  struct AV {  // abstract value
    bool is_int;
    int value;  // capped minimal member size (order-0)
    int aclos;  // abstract closure id (higher-order)
    auto operator<=>(const AV&) const = default;
  };

  // Abstract environments: either an interned binding chain or a wrapper
  // around a concrete machine environment (looked up lazily).
  struct AEnv {
    bool wrap;
    int parent;       // abstract parent (chain nodes)
    std::string name; // bound name (chain nodes)
    AV av;            // bound value (chain nodes)
    int concrete;     // machine env id (wrap nodes)
  };
  std::vector<AEnv> aenvs;
  std::map<std::tuple<int, std::string, AV>, int> chain_ids;
  std::map<int, int> wrap_ids;

  struct AClos {
    const LambdaTerm* term;
    int aenv;
    auto operator<=>(const AClos&) const = default;
  };
  std::vector<AClos> acloses;
  std::map<AClos, int> aclos_ids;

  struct Cfg {
    const LambdaTerm* term;
    int aenv;
    std::vector<AV> stack;
    auto operator<=>(const Cfg&) const = default;
  };
  std::vector<Cfg> cfgs;
  std::map<Cfg, int> cfg_ids;
  std::vector<int> value;

  MsizeAnalysis(const Machine& machine, const Scheme& scheme, int bound, long budget)
      : m(machine), g(scheme), cap(bound + 1), step_budget(budget) {}

  int term_order(const LambdaTerm* t) {
    auto it = order_memo.find(t);
    if (it != order_memo.end()) return it->second;
    int o = infer_type(*t, &g).order();
    order_memo.emplace(t, o);
    return o;
  }

  int intern_chain(int parent, const std::string& name, AV av) {
    auto key = std::make_tuple(parent, name, av);
    auto it = chain_ids.find(key);
    if (it != chain_ids.end()) return it->second;
    int id = static_cast<int>(aenvs.size());
    aenvs.push_back({false, parent, name, av, -1});
    chain_ids.emplace(key, id);
    return id;
  }

  int intern_wrap(int concrete) {
    if (concrete < 0) return -1;
    auto it = wrap_ids.find(concrete);
    if (it != wrap_ids.end()) return it->second;
    int id = static_cast<int>(aenvs.size());
    aenvs.push_back({true, -1, "", {}, concrete});
    wrap_ids.emplace(concrete, id);
    return id;
  }

  int intern_aclos(const LambdaTerm* t, int aenv) {
    AClos c{t, aenv};
    auto it = aclos_ids.find(c);
    if (it != aclos_ids.end()) return it->second;
    int id = static_cast<int>(acloses.size());
    acloses.push_back(c);
    aclos_ids.emplace(c, id);
    return id;
  }

  int intern_cfg(const LambdaTerm* t, int aenv, std::vector<AV> stack) {
    Cfg c{t, aenv, std::move(stack)};
    auto it = cfg_ids.find(c);
    if (it != cfg_ids.end()) return it->second;
    int id = static_cast<int>(cfgs.size());
    cfgs.push_back(std::move(c));
    cfg_ids.emplace(cfgs.back(), id);
    value.push_back(cap);
    if (cfgs.size() > 20000) failed = true;
    return id;
  }

  // Abstract value of a concrete machine closure.
  AV abstract_closure(int clos, int order) {
    const auto& c = m.closures[static_cast<std::size_t>(clos)];
    if (order == 0) {
      int cfg = intern_cfg(c.term, intern_wrap(c.env), {});
      return {true, value[static_cast<std::size_t>(cfg)], -1};
    }
    return {false, 0, intern_aclos(c.term, intern_wrap(c.env))};
  }

  std::optional<AV> alookup(int aenv, const std::string& name) {
    while (aenv >= 0) {
      const AEnv node = aenvs[static_cast<std::size_t>(aenv)];
      if (node.wrap) {
        int env = node.concrete;
        while (env >= 0) {
          const auto& b = m.envs[static_cast<std::size_t>(env)];
          if (b.name == name) return abstract_closure(b.clos, b.order);
          env = b.parent;
        }
        return std::nullopt;
      }
      if (node.name == name) return node.av;
      aenv = node.parent;
    }
    return std::nullopt;
  }

  // Machine configurations whose minimal member size the caller wants. They
  // are re-abstracted every round because the stack abstraction snapshots
  // current values.
  std::vector<Machine::Config> seeds;
  std::vector<int> seed_ids;

  void add_seed(const Machine::Config& config) {
    seeds.push_back(config);
    seed_ids.push_back(-1);
  }

  int seed_cfg(const Machine::Config& config) {
    const auto& c = m.closures[static_cast<std::size_t>(config.closure)];
    std::vector<AV> stack;
    for (int arg : config.stack)
      stack.push_back(abstract_closure(
          arg, term_order(m.closures[static_cast<std::size_t>(arg)].term)));
    return intern_cfg(c.term, intern_wrap(c.env), std::move(stack));
  }

  int eval_cfg(int id) {
    const LambdaTerm* t = cfgs[static_cast<std::size_t>(id)].term;
    int aenv = cfgs[static_cast<std::size_t>(id)].aenv;
    std::vector<AV> stack = cfgs[static_cast<std::size_t>(id)].stack;
    for (;;) {
      if (failed || step_budget-- <= 0) {
        failed = true;
        return 0;
      }
      switch (t->kind) {
        case LambdaTerm::Kind::Application: {
          const LambdaTerm* a = t->arg.get();
          AV av;
          if (term_order(a) == 0) {
            if (a->kind == LambdaTerm::Kind::Variable) {
              auto found = alookup(aenv, a->name);
              if (!found) {
                failed = true;
                return 0;
              }
              av = *found;
            } else {
              int sub = intern_cfg(a, aenv, {});
              av = {true, value[static_cast<std::size_t>(sub)], -1};
            }
          } else if (a->kind == LambdaTerm::Kind::Variable) {
            auto found = alookup(aenv, a->name);
            if (!found) {
              failed = true;
              return 0;
            }
            av = *found;
          } else {
            av = {false, 0, intern_aclos(a, aenv)};
          }
          stack.push_back(av);
          t = t->fun.get();
          break;
        }
        case LambdaTerm::Kind::Variable: {
          auto found = alookup(aenv, t->name);
          if (!found) {
            failed = true;
            return 0;
          }
          if (found->is_int) {
            if (!stack.empty()) {
              failed = true;
              return 0;
            }
            return found->value;
          }
          t = acloses[static_cast<std::size_t>(found->aclos)].term;
          aenv = acloses[static_cast<std::size_t>(found->aclos)].aenv;
          break;
        }
        case LambdaTerm::Kind::Lambda: {
          if (stack.empty()) {
            failed = true;
            return 0;
          }
          AV av = stack.back();
          stack.pop_back();
          aenv = intern_chain(aenv, t->name, av);
          t = t->body.get();
          break;
        }
        case LambdaTerm::Kind::Nonterminal:
          t = g.rules.at(t->name).get();
          aenv = -1;
          break;
        case LambdaTerm::Kind::Letter: {
          if (t->name == g.alphabet.bottom.value_or(kBottom)) return cap;
          if (g.alphabet.nd && t->name == *g.alphabet.nd && stack.size() == 2) {
            int best = cap;
            for (const AV& av : stack) best = std::min(best, av.is_int ? av.value : cap);
            return best;
          }
          long total = 1;
          for (const AV& av : stack) total += av.is_int ? av.value : cap;
          return static_cast<int>(std::min<long>(total, cap));
        }
      }
    }
  }

  void run() {
    for (int round = 0; round < 200 && !failed; ++round) {
      bool changed = false;
      std::size_t before = cfgs.size();
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        int id = seed_cfg(seeds[s]);
        if (id != seed_ids[s]) {
          seed_ids[s] = id;
          changed = true;
        }
      }
      for (std::size_t i = 0; i < cfgs.size(); ++i) {
        int v = eval_cfg(static_cast<int>(i));
        if (failed) return;
        if (v != value[i]) {
          value[i] = v;
          changed = true;
        }
      }
      if (!changed && cfgs.size() == before) return;
    }
    failed = true;  // ran out of rounds before certifying a fixpoint
  }
};

// Minimal completed-member size of each prefix subtree, using msize values at
// unknown leaves; `inf` stands for "no member within the bound".
struct SaturationCheck {
  const std::map<std::vector<int>, int>& leaf_msize;  // path -> capped msize
  std::string nd_name;
  int cap;

  int down(const Tree& t, std::vector<int>& path) {
    if (t.label == kUnknown) {
      auto it = leaf_msize.find(path);
      return it == leaf_msize.end() ? cap : it->second;
    }
    if (t.label == kBottom) return cap;
    if (t.label == nd_name && t.children.size() == 2) {
      int best = cap;
      for (std::size_t i = 0; i < t.children.size(); ++i) {
        path.push_back(static_cast<int>(i));
        best = std::min(best, down(t.children[i], path));
        path.pop_back();
      }
      return best;
    }
    long total = 1;
    for (std::size_t i = 0; i < t.children.size(); ++i) {
      path.push_back(static_cast<int>(i));
      total += down(t.children[i], path);
      path.pop_back();
    }
    return static_cast<int>(std::min<long>(total, cap));
  }

  // True if some unknown leaf admits a completion of size < cap.
  bool reachable(const Tree& t, long acc, std::vector<int>& path) {
    if (acc >= cap) return false;
    if (t.label == kUnknown) {
      auto it = leaf_msize.find(path);
      int msize = it == leaf_msize.end() ? cap : it->second;
      return acc + msize < cap;
    }
    if (t.label == kBottom) return false;
    if (t.label == nd_name && t.children.size() == 2) {
      for (std::size_t i = 0; i < t.children.size(); ++i) {
        path.push_back(static_cast<int>(i));
        bool hit = reachable(t.children[i], acc, path);
        path.pop_back();
        if (hit) return true;
      }
      return false;
    }
    // Passing through a letter costs the letter itself plus the cheapest
    // completion of every sibling subtree.
    std::vector<int> child_min(t.children.size());
    for (std::size_t i = 0; i < t.children.size(); ++i) {
      path.push_back(static_cast<int>(i));
      child_min[i] = down(t.children[i], path);
      path.pop_back();
    }
    for (std::size_t i = 0; i < t.children.size(); ++i) {
      long acc2 = acc + 1;
      for (std::size_t j = 0; j < t.children.size(); ++j)
        if (j != i) acc2 += child_min[j];
      path.push_back(static_cast<int>(i));
      bool hit = reachable(t.children[i], acc2, path);
      path.pop_back();
      if (hit) return true;
    }
    return false;
  }
};

}  // namespace

EnumerationResult language_enumerate(const Scheme& g, int size_bound, int depth,
                                     long step_fuel) {
  Machine m(g, step_fuel);
  const Machine::EvalOut& out = m.run(depth);
  EnumerationResult result;
  std::string nd_name = g.alphabet.nd.value_or("nd");
  std::string bot_name = g.alphabet.bottom.value_or(kBottom);
  result.members = nd_resolutions(out.tree, static_cast<std::size_t>(size_bound),
                                  nd_name, bot_name, kUnknown);
  if (out.unknowns.empty()) {
    result.saturated = true;
    return result;
  }

  MsizeAnalysis analysis(m, g, size_bound, 2000000);
  for (const auto& [path, config] : out.unknowns) analysis.add_seed(config);
  analysis.run();
  if (analysis.failed) {
    result.saturated = false;
    return result;
  }
  std::map<std::vector<int>, int> leaf_msize;
  for (std::size_t s = 0; s < out.unknowns.size(); ++s)
    leaf_msize[out.unknowns[s].first] =
        analysis.value[static_cast<std::size_t>(analysis.seed_ids[s])];

  SaturationCheck check{leaf_msize, nd_name, size_bound + 1};
  std::vector<int> path;
  result.saturated = !check.reachable(out.tree, 0, path);
  return result;
}

}  // namespace dcl
