#include "dcl/cost.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace dcl {

// --- Counter-action valuation ------------------------------------------------

long val(const std::vector<CounterAction>& word) {
  std::size_t width = word.empty() ? 0 : word.front().size();
  std::vector<long> counter(width, 0);
  long best = 0;
  for (const CounterAction& act : word) {
    if (act.size() != width) throw Error("counter actions have mixed widths");
    for (std::size_t j = 0; j < width; ++j) {
      switch (act[j]) {
        case CounterOp::Inc:
          best = std::max(best, ++counter[j]);
          break;
        case CounterOp::Reset:
          counter[j] = 0;
          break;
        case CounterOp::Skip:
          break;
      }
    }
  }
  return best;
}

std::optional<long> val(const std::vector<CounterAction>& prefix,
                        const std::vector<CounterAction>& cycle) {
  std::size_t width = prefix.empty()
                          ? (cycle.empty() ? 0 : cycle.front().size())
                          : prefix.front().size();
  for (const CounterAction& act : cycle)
    if (act.size() != width) throw Error("counter actions have mixed widths");
  for (std::size_t j = 0; j < width; ++j) {
    bool inc = false;
    bool reset = false;
    for (const CounterAction& act : cycle) {
      inc |= act[j] == CounterOp::Inc;
      reset |= act[j] == CounterOp::Reset;
    }
    if (inc && !reset) return std::nullopt;
  }
  // Counter values at the cycle entry are stable from the second pass on.
  std::vector<CounterAction> unfolded = prefix;
  unfolded.insert(unfolded.end(), cycle.begin(), cycle.end());
  unfolded.insert(unfolded.end(), cycle.begin(), cycle.end());
  return val(unfolded);
}

// --- BAutomaton basics --------------------------------------------------------

bool BAutomaton::has_state(const std::string& name) const {
  for (const auto& [s, pr] : states)
    if (s == name) return true;
  return false;
}

int BAutomaton::priority(const std::string& name) const {
  for (const auto& [s, pr] : states)
    if (s == name) return pr;
  throw Error("unknown state " + name);
}

bool BAutomaton::one_way() const {
  for (const auto& [key, dnf] : delta)
    for (const Conjunct& c : dnf)
      for (const Move& m : c)
        if (m.direction == kUp) return false;
  return true;
}

void BAutomaton::validate() const {
  if (states.empty()) throw Error("automaton needs at least one state");
  std::set<std::string> seen;
  for (const auto& [name, pr] : states) {
    if (!seen.insert(name).second) throw Error("duplicate state " + name);
    if (pr < 0) throw Error("negative priority on state " + name);
  }
  if (!has_state(initial))
    throw Error("initial state " + initial + " is not declared");
  if (counters < 0) throw Error("negative counter count");
  for (const auto& [key, dnf] : delta) {
    const std::string where = "delta(" + key.first + ", " + key.second + ")";
    if (!has_state(key.first)) throw Error(where + ": state not declared");
    if (!alphabet.contains(key.second))
      throw Error(where + ": letter not declared");
    int rank = alphabet.rank(key.second);
    if (dnf.empty()) throw Error(where + ": no disjuncts");
    bool up_free = false;
    for (const Conjunct& c : dnf) {
      if (c.empty()) throw Error(where + ": empty disjunct");
      bool uses_up = false;
      for (const Move& m : c) {
        if (m.direction < kUp || m.direction > rank)
          throw Error(where + ": direction exceeds the rank of " + key.second);
        if (static_cast<int>(m.action.size()) != counters)
          throw Error(where + ": action lists " +
                      std::to_string(m.action.size()) + " counters, expected " +
                      std::to_string(counters));
        if (!has_state(m.state))
          throw Error(where + ": target state " + m.state + " not declared");
        uses_up |= m.direction == kUp;
      }
      up_free |= !uses_up;
    }
    if (!up_free) throw Error(where + ": needs a disjunct without up moves");
  }
}

// --- Parsing and printing -----------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  for (;;) {
    std::size_t next = s.find(sep, pos);
    if (next == std::string::npos) {
      parts.push_back(s.substr(pos));
      return parts;
    }
    parts.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

CounterOp parse_op(const std::string& tok, int line) {
  if (tok == "i" || tok == "ic") return CounterOp::Inc;
  if (tok == "r") return CounterOp::Reset;
  if (tok == "e") return CounterOp::Skip;
  throw ParseError("bad counter action '" + tok + "'", line);
}

CounterAction parse_action(const std::string& text, int counters, int line) {
  std::vector<std::string> toks = split_on(text, ',');
  if (counters == 0) {
    if (toks.size() == 1 && trim(toks[0]) == "e") return {};
    throw ParseError("automaton has no counters; write the action as 'e'", line);
  }
  if (static_cast<int>(toks.size()) != counters)
    throw ParseError("action needs one entry per counter", line);
  CounterAction act;
  for (const std::string& t : toks) act.push_back(parse_op(trim(t), line));
  return act;
}

int parse_direction(const std::string& tok, int line) {
  if (tok == "up") return kUp;
  if (tok == "stay") return kStay;
  if (tok.rfind("down", 0) == 0 && tok.size() > 4) {
    bool digits = true;
    for (std::size_t i = 4; i < tok.size(); ++i)
      digits &= tok[i] >= '0' && tok[i] <= '9';
    if (digits) {
      int i = std::stoi(tok.substr(4));
      if (i >= 1) return i;
    }
  }
  throw ParseError("bad direction '" + tok + "'", line);
}

std::string direction_str(int d) {
  if (d == kUp) return "up";
  if (d == kStay) return "stay";
  return "down" + std::to_string(d);
}

std::string action_str(const CounterAction& act) {
  if (act.empty()) return "e";
  std::string out;
  for (std::size_t j = 0; j < act.size(); ++j) {
    if (j > 0) out += ",";
    switch (act[j]) {
      case CounterOp::Inc: out += "i"; break;
      case CounterOp::Reset: out += "r"; break;
      case CounterOp::Skip: out += "e"; break;
    }
  }
  return out;
}

}  // namespace

BAutomaton parse_bautomaton(const std::string& text) {
  BAutomaton a;
  bool letters_declared = false;
  // Transition bodies are parsed after all header lines so that the counter
  // count is known regardless of line order.
  struct PendingRule {
    int line;
    std::string state, letter, rhs;
  };
  std::vector<PendingRule> pending;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto cut = line.find("--");
    if (cut != std::string::npos) line.erase(cut);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "letters") {
      std::string decl;
      while (ls >> decl) {
        auto slash = decl.find('/');
        if (slash == std::string::npos)
          throw ParseError("letter declaration needs name/rank", lineno);
        int rank;
        try {
          rank = std::stoi(decl.substr(slash + 1));
        } catch (const std::exception&) {
          throw ParseError("bad rank in letter declaration " + decl, lineno);
        }
        a.alphabet.add(decl.substr(0, slash), rank);
      }
      letters_declared = true;
      continue;
    }
    if (first == "states") {
      std::string decl;
      while (ls >> decl) {
        auto colon = decl.find(':');
        if (colon == std::string::npos)
          throw ParseError("state declaration needs name:priority", lineno);
        int pr;
        try {
          pr = std::stoi(decl.substr(colon + 1));
        } catch (const std::exception&) {
          throw ParseError("bad priority in state declaration " + decl, lineno);
        }
        a.states.emplace_back(decl.substr(0, colon), pr);
      }
      continue;
    }
    if (first == "counters") {
      if (!(ls >> a.counters))
        throw ParseError("counters needs a number", lineno);
      continue;
    }
    if (first == "init") {
      if (!(ls >> a.initial)) throw ParseError("init needs a state", lineno);
      continue;
    }
    std::string rest;
    std::getline(ls, rest);
    std::string full = first + rest;
    auto comma = full.find(',');
    auto arrow = full.find("->");
    if (comma == std::string::npos || arrow == std::string::npos ||
        comma > arrow)
      throw ParseError("expected 'state, letter -> transition'", lineno);
    std::string state = trim(full.substr(0, comma));
    std::string letter = trim(full.substr(comma + 1, arrow - comma - 1));
    if (state.empty() || letter.empty())
      throw ParseError("expected 'state, letter -> transition'", lineno);
    pending.push_back({lineno, state, letter, full.substr(arrow + 2)});
  }
  for (const PendingRule& rule : pending) {
    Dnf dnf;
    for (const std::string& raw : split_on(rule.rhs, '|')) {
      std::string disjunct = trim(raw);
      if (disjunct.size() >= 2 && disjunct.front() == '(' &&
          disjunct.back() == ')')
        disjunct = trim(disjunct.substr(1, disjunct.size() - 2));
      Conjunct conj;
      for (const std::string& raw_move : split_on(disjunct, '&')) {
        std::istringstream ms(raw_move);
        std::string dir, action, state, extra;
        if (!(ms >> dir >> action >> state) || ms >> extra)
          throw ParseError("a move needs 'direction action state'", rule.line);
        conj.push_back({parse_direction(dir, rule.line),
                        parse_action(action, a.counters, rule.line), state});
      }
      dnf.push_back(std::move(conj));
    }
    if (a.delta.count({rule.state, rule.letter}))
      throw ParseError(
          "duplicate transition for " + rule.state + ", " + rule.letter,
          rule.line);
    a.delta[{rule.state, rule.letter}] = std::move(dnf);
  }
  if (!letters_declared) {
    // Infer each letter's rank from the child indices used on it.
    std::map<std::string, int> rank;
    for (const auto& [key, dnf] : a.delta) {
      int& r = rank[key.second];
      for (const Conjunct& c : dnf)
        for (const Move& m : c) r = std::max(r, m.direction);
    }
    for (const auto& [name, r] : rank) a.alphabet.add(name, r);
  }
  a.validate();
  return a;
}

std::string to_string(const BAutomaton& a) {
  std::string out = "letters";
  for (const auto& [name, rank] : a.alphabet.letters())
    out += " " + name + "/" + std::to_string(rank);
  out += "\nstates";
  for (const auto& [name, pr] : a.states)
    out += " " + name + ":" + std::to_string(pr);
  out += "\ncounters " + std::to_string(a.counters);
  out += "\ninit " + a.initial + "\n";
  for (const auto& [key, dnf] : a.delta) {
    out += key.first + ", " + key.second + " ->";
    for (std::size_t d = 0; d < dnf.size(); ++d) {
      out += d == 0 ? " (" : " | (";
      for (std::size_t i = 0; i < dnf[d].size(); ++i) {
        if (i > 0) out += " & ";
        const Move& m = dnf[d][i];
        out += direction_str(m.direction) + " " + action_str(m.action) + " " +
               m.state;
      }
      out += ")";
    }
    out += "\n";
  }
  return out;
}

// --- Arena construction -------------------------------------------------------

namespace {

void check_tree_coverage(const BAutomaton& a, const RegularTree& t) {
  for (const auto& [letter, rank] : t.letters()) {
    if (!a.alphabet.contains(letter) || a.alphabet.rank(letter) != rank)
      throw Error("automaton alphabet is missing tree letter " + letter + "/" +
                  std::to_string(rank));
    for (const auto& [state, pr] : a.states)
      if (!a.delta.count({state, letter}))
        throw Error("no transition for state " + state + " and letter " +
                    letter);
  }
}

}  // namespace

GameArena build_arena(const BAutomaton& a, const RegularTree& t) {
  a.validate();
  t.validate();
  if (!a.one_way())
    throw Error("build_arena needs a one-way automaton (no up moves)");
  check_tree_coverage(a, t);

  GameArena arena;
  arena.counters = a.counters;
  std::map<std::pair<std::string, std::string>, int> eve_id;
  for (const auto& [name, node] : t.equations)
    for (const auto& [state, pr] : a.states) {
      eve_id[{name, state}] = static_cast<int>(arena.positions.size());
      arena.positions.push_back({name, state, -1, pr, true});
    }
  arena.moves.resize(arena.positions.size());
  for (const auto& [name, node] : t.equations)
    for (const auto& [state, pr] : a.states) {
      int from = eve_id[{name, state}];
      const Dnf& dnf = a.delta.at({state, node.label});
      for (std::size_t d = 0; d < dnf.size(); ++d) {
        int pend = static_cast<int>(arena.positions.size());
        arena.positions.push_back({name, state, static_cast<int>(d), 0, false});
        arena.moves.emplace_back();
        arena.moves[from].push_back({pend, {}});
        for (const Move& m : dnf[d]) {
          const std::string& next =
              m.direction == kStay ? name : node.children[m.direction - 1];
          arena.moves[pend].push_back({eve_id.at({next, m.state}), m.action});
        }
      }
    }
  arena.initial = eve_id.at({t.root, a.initial});
  return arena;
}

// --- Parity solving -----------------------------------------------------------

namespace {

struct ParityGame {
  std::vector<char> eve;  // owner per node
  std::vector<int> priority;
  std::vector<std::vector<int>> succ;
  std::vector<std::vector<int>> pred;

  void finish_edges() {
    pred.assign(succ.size(), {});
    for (std::size_t v = 0; v < succ.size(); ++v)
      for (int w : succ[v]) pred[w].push_back(static_cast<int>(v));
  }
};

// Attractor of `base` for one player within `alive` (counts edge multiplicity).
std::vector<char> attract(const ParityGame& g, const std::vector<char>& alive,
                          const std::vector<char>& base, bool eve_player) {
  std::size_t n = g.priority.size();
  std::vector<int> out_cnt(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (!alive[v]) continue;
    for (int w : g.succ[v])
      if (alive[w]) ++out_cnt[v];
  }
  std::vector<char> in(n, 0);
  std::vector<int> queue;
  for (std::size_t v = 0; v < n; ++v)
    if (alive[v] && base[v]) {
      in[v] = 1;
      queue.push_back(static_cast<int>(v));
    }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    int w = queue[qi];
    for (int v : g.pred[w]) {
      if (!alive[v] || in[v]) continue;
      bool take = (g.eve[v] != 0) == eve_player || --out_cnt[v] == 0;
      if (take) {
        in[v] = 1;
        queue.push_back(v);
      }
    }
  }
  return in;
}

// Zielonka's attractor decomposition; returns the Eve-winning mask.
std::vector<char> zielonka(const ParityGame& g, const std::vector<char>& alive) {
  std::size_t n = g.priority.size();
  std::vector<char> eve_win(n, 0);
  int p = -1;
  for (std::size_t v = 0; v < n; ++v)
    if (alive[v]) p = std::max(p, g.priority[v]);
  if (p < 0) return eve_win;
  bool eve_player = p % 2 == 0;
  std::vector<char> base(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    if (alive[v] && g.priority[v] == p) base[v] = 1;
  std::vector<char> head = attract(g, alive, base, eve_player);
  std::vector<char> rest(n, 0);
  for (std::size_t v = 0; v < n; ++v) rest[v] = alive[v] && !head[v];
  std::vector<char> sub = zielonka(g, rest);
  bool opponent_present = false;
  std::vector<char> opp(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    if (rest[v] && (sub[v] != 0) != eve_player) {
      opp[v] = 1;
      opponent_present = true;
    }
  if (!opponent_present) {
    if (eve_player)
      for (std::size_t v = 0; v < n; ++v) eve_win[v] = alive[v];
    return eve_win;
  }
  std::vector<char> trap = attract(g, alive, opp, !eve_player);
  std::vector<char> rest2(n, 0);
  for (std::size_t v = 0; v < n; ++v) rest2[v] = alive[v] && !trap[v];
  std::vector<char> sub2 = zielonka(g, rest2);
  for (std::size_t v = 0; v < n; ++v) {
    if (!alive[v]) continue;
    if (trap[v])
      eve_win[v] = eve_player ? 0 : 1;
    else
      eve_win[v] = sub2[v];
  }
  return eve_win;
}

}  // namespace

bool n_wins(const GameArena& arena, int n) {
  if (n < 0) return false;
  // Expand counter valuations (capped: exceeding n is an immediate loss) into
  // the positions, then solve the finite parity game.
  ParityGame g;
  std::map<std::pair<int, std::vector<int>>, int> ids;
  std::vector<std::pair<int, std::vector<int>>> nodes;
  auto node_id = [&](int pos, std::vector<int> counters) {
    auto key = std::make_pair(pos, std::move(counters));
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(nodes.size());
    nodes.push_back(key);
    ids.emplace(std::move(key), id);
    if (nodes.size() > 5000000) throw Error("n_wins: expanded game too large");
    return id;
  };
  const int sink = node_id(-1, {});  // Adam's win: a counter exceeded n
  g.eve.push_back(0);
  g.priority.push_back(1);
  g.succ.push_back({sink});
  int init = node_id(arena.initial, std::vector<int>(arena.counters, 0));
  for (std::size_t v = 1; v < nodes.size(); ++v) {
    const auto [pos, counters] = nodes[v];  // copy: node_id may grow `nodes`
    g.eve.push_back(arena.positions[pos].eve ? 1 : 0);
    g.priority.push_back(arena.positions[pos].priority);
    std::vector<int> succ;
    for (const GameArena::Edge& e : arena.moves[pos]) {
      std::vector<int> next = counters;
      bool overflow = false;
      for (std::size_t j = 0; j < e.action.size(); ++j) {
        if (e.action[j] == CounterOp::Inc && ++next[j] > n) {
          overflow = true;
          break;
        }
        if (e.action[j] == CounterOp::Reset) next[j] = 0;
      }
      succ.push_back(overflow ? sink : node_id(e.target, std::move(next)));
    }
    g.succ.push_back(std::move(succ));
  }
  g.finish_edges();
  std::vector<char> alive(g.priority.size(), 1);
  return zielonka(g, alive)[init] != 0;
}

// --- Bounded acceptance -------------------------------------------------------

std::string BoundedResult::str() const {
  switch (kind) {
    case Kind::AcceptedAt:
      return "accepted_at " + std::to_string(bound);
    case Kind::RejectedUpTo:
      return "rejected_up_to " + std::to_string(bound);
    case Kind::Unknown:
      break;
  }
  return "unknown";
}

namespace {

enum class V3 { Lose = 0, Unknown = 1, Win = 2 };

// Minimax over path-extended positions of a two-way game. A position repeated
// along the current line of play closes a cycle whose counters are unchanged
// and whose within-cycle values already passed the cap check, so its plays are
// decided by the parity of the maximal priority on the cycle. Running out of
// fuel or recursion depth yields Unknown, which never overrides a definite
// verdict. Paths are interned as parent links so on-path keys stay small.
struct TwoWayExplorer {
  const BAutomaton& a;
  const RegularTree& t;
  int cap;
  long fuel;

  struct PathNode {
    int parent;  // -1 at the root
    std::string name;
  };
  std::vector<PathNode> path_nodes;
  std::map<std::pair<int, std::string>, int> path_children;
  using Key = std::tuple<int, std::string, std::vector<int>>;
  std::map<Key, std::size_t> on_path;
  std::vector<int> entered;  // state priorities along the current line

  static constexpr std::size_t kMaxDepth = 8000;

  int intern(int parent, const std::string& name) {
    auto [it, fresh] = path_children.try_emplace(
        {parent, name}, static_cast<int>(path_nodes.size()));
    if (fresh) path_nodes.push_back({parent, name});
    return it->second;
  }

  V3 eve(int path, const std::string& state,
         const std::vector<int>& counters) {
    Key key{path, state, counters};
    if (auto it = on_path.find(key); it != on_path.end()) {
      int top = 0;
      for (std::size_t i = it->second; i < entered.size(); ++i)
        top = std::max(top, entered[i]);
      return top % 2 == 0 ? V3::Win : V3::Lose;
    }
    if (fuel-- <= 0 || entered.size() >= kMaxDepth) return V3::Unknown;
    const RegularTree::Node& node = t.at(path_nodes[path].name);
    const Dnf& dnf = a.delta.at({state, node.label});
    on_path.emplace(key, entered.size());
    entered.push_back(a.priority(state));
    bool at_root = path_nodes[path].parent < 0;
    V3 best = V3::Lose;
    for (const Conjunct& c : dnf) {
      if (at_root) {
        bool uses_up = false;
        for (const Move& m : c) uses_up |= m.direction == kUp;
        if (uses_up) continue;  // no up from the root
      }
      V3 v = adam(c, path, counters, node);
      best = std::max(best, v);
      if (best == V3::Win) break;
    }
    entered.pop_back();
    on_path.erase(key);
    return best;
  }

  V3 adam(const Conjunct& c, int path, const std::vector<int>& counters,
          const RegularTree::Node& node) {
    V3 worst = V3::Win;
    for (const Move& m : c) {
      std::vector<int> next = counters;
      bool overflow = false;
      for (std::size_t j = 0; j < m.action.size(); ++j) {
        if (m.action[j] == CounterOp::Inc && ++next[j] > cap) {
          overflow = true;
          break;
        }
        if (m.action[j] == CounterOp::Reset) next[j] = 0;
      }
      V3 v;
      if (overflow) {
        v = V3::Lose;
      } else if (m.direction == kStay) {
        v = eve(path, m.state, next);
      } else if (m.direction == kUp) {
        v = eve(path_nodes[path].parent, m.state, next);
      } else {
        int child = intern(
            path, node.children[static_cast<std::size_t>(m.direction) - 1]);
        v = eve(child, m.state, next);
      }
      worst = std::min(worst, v);
      if (worst == V3::Lose) break;
    }
    return worst;
  }
};

}  // namespace

BoundedResult accepts_bounded(const BAutomaton& a, const RegularTree& t,
                              int n_max, long fuel) {
  if (a.one_way()) {
    GameArena arena = build_arena(a, t);
    for (int n = 0; n <= n_max; ++n)
      if (n_wins(arena, n)) return {BoundedResult::Kind::AcceptedAt, n};
    return {BoundedResult::Kind::RejectedUpTo, n_max};
  }
  a.validate();
  t.validate();
  check_tree_coverage(a, t);
  bool saw_unknown = false;
  for (int n = 0; n <= n_max; ++n) {
    TwoWayExplorer explorer{a, t, n, fuel, {}, {}, {}, {}};
    int root = explorer.intern(-1, t.root);
    V3 v = explorer.eve(root, a.initial, std::vector<int>(a.counters, 0));
    if (v == V3::Win) return {BoundedResult::Kind::AcceptedAt, n};
    saw_unknown |= v == V3::Unknown;
  }
  if (saw_unknown) return {BoundedResult::Kind::Unknown, n_max};
  return {BoundedResult::Kind::RejectedUpTo, n_max};
}

}  // namespace dcl
