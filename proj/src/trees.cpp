#include "dcl/trees.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace dcl {

ParseError::ParseError(const std::string& what, int line_)
    : Error(line_ >= 0 ? "line " + std::to_string(line_) + ": " + what : what),
      line(line_) {}

void RankedAlphabet::add(const Letter& a, int rank) {
  if (a == kHole) throw Error("'#' is reserved for context holes");
  if (rank < 0) throw Error("negative rank for letter " + a);
  auto it = ranks_.find(a);
  if (it != ranks_.end() && it->second != rank)
    throw Error("letter " + a + " redeclared with a different rank");
  ranks_[a] = rank;
  if (a == "nd" && !nd) nd = a;
  if (a == kBottom && !bottom) bottom = a;
}

int RankedAlphabet::rank(const Letter& a) const {
  auto it = ranks_.find(a);
  if (it == ranks_.end()) throw Error("unknown letter " + a);
  return it->second;
}

void RankedAlphabet::validate() const {
  if (nd && rank(*nd) != 2) throw Error("nd letter must have rank 2");
  if (bottom && rank(*bottom) != 0) throw Error("bottom letter must have rank 0");
}

std::size_t Tree::size() const {
  std::size_t n = 1;
  for (const Tree& c : children) n += c.size();
  return n;
}

std::size_t Tree::depth() const {
  std::size_t d = 0;
  for (const Tree& c : children) d = std::max(d, c.depth());
  return d + 1;
}

bool Tree::operator<(const Tree& o) const {
  if (label != o.label) return label < o.label;
  return std::lexicographical_compare(children.begin(), children.end(),
                                      o.children.begin(), o.children.end());
}

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' ||
         c == '#';
}

struct TreeParser {
  const std::string& s;
  std::size_t pos = 0;

  void skip() {
    while (pos < s.size()) {
      if (std::isspace(static_cast<unsigned char>(s[pos]))) {
        ++pos;
      } else if (s[pos] == '-' && pos + 1 < s.size() && s[pos + 1] == '-') {
        while (pos < s.size() && s[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  std::string ident() {
    skip();
    std::size_t start = pos;
    while (pos < s.size() && ident_char(s[pos])) ++pos;
    if (pos == start) throw ParseError("expected a letter at offset " + std::to_string(pos));
    return s.substr(start, pos - start);
  }

  Tree tree() {
    Tree t(ident());
    skip();
    if (pos < s.size() && s[pos] == '(') {
      ++pos;
      skip();
      if (pos < s.size() && s[pos] == ')') {
        ++pos;
        return t;
      }
      while (true) {
        t.children.push_back(tree());
        skip();
        if (pos < s.size() && s[pos] == ',') {
          ++pos;
          continue;
        }
        if (pos < s.size() && s[pos] == ')') {
          ++pos;
          break;
        }
        throw ParseError("expected ',' or ')' at offset " + std::to_string(pos));
      }
    }
    return t;
  }
};

}  // namespace

Tree parse_tree(const std::string& text) {
  TreeParser p{text};
  Tree t = p.tree();
  p.skip();
  if (p.pos != text.size())
    throw ParseError("trailing input after tree at offset " + std::to_string(p.pos));
  return t;
}

std::string to_string(const Tree& t) {
  std::string out = t.label;
  if (!t.children.empty()) {
    out += '(';
    for (std::size_t i = 0; i < t.children.size(); ++i) {
      if (i) out += ',';
      out += to_string(t.children[i]);
    }
    out += ')';
  }
  return out;
}

namespace {
void collect_letters(const Tree& t, std::map<Letter, int>& out) {
  auto [it, fresh] = out.emplace(t.label, static_cast<int>(t.children.size()));
  if (!fresh && it->second != static_cast<int>(t.children.size()))
    throw Error("letter " + t.label + " used with two different ranks");
  for (const Tree& c : t.children) collect_letters(c, out);
}
}  // namespace

std::map<Letter, int> observed_letters(const Tree& t) {
  std::map<Letter, int> out;
  collect_letters(t, out);
  return out;
}

RankedAlphabet merge_alphabets(const RankedAlphabet& a, const RankedAlphabet& b) {
  RankedAlphabet out = a;
  for (const auto& [l, r] : b.letters()) {
    if (!out.contains(l))
      out.add(l, r);
    else if (out.rank(l) != r)
      throw Error("merge_alphabets: rank conflict for '" + l + "'");
  }
  if (!out.nd) out.nd = b.nd;
  if (!out.bottom) out.bottom = b.bottom;
  return out;
}

bool embeds(const Tree& s, const Tree& t) {
  for (const Tree& c : t.children)
    if (embeds(s, c)) return true;
  if (s.label != t.label || s.children.size() != t.children.size()) return false;
  for (std::size_t i = 0; i < s.children.size(); ++i)
    if (!embeds(s.children[i], t.children[i])) return false;
  return true;
}

bool embeds_into_any(const Tree& needle, const std::set<Tree>& hay) {
  return std::any_of(hay.begin(), hay.end(),
                     [&](const Tree& t) { return embeds(needle, t); });
}

std::set<Tree> substitute(const Tree& c, const std::set<Tree>& fill) {
  if (c.label == kHole) return fill;
  std::vector<std::set<Tree>> parts;
  parts.reserve(c.children.size());
  for (const Tree& child : c.children) parts.push_back(substitute(child, fill));
  std::set<Tree> out;
  std::vector<Tree> acc(c.children.size());
  // cartesian product over child alternatives
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == parts.size()) {
      out.insert(Tree(c.label, acc));
      return;
    }
    for (const Tree& option : parts[i]) {
      acc[i] = option;
      self(self, i + 1);
    }
  };
  rec(rec, 0);
  return out;
}

std::size_t count_holes(const Tree& c) {
  if (c.label == kHole) return 1;
  std::size_t n = 0;
  for (const Tree& ch : c.children) n += count_holes(ch);
  return n;
}

namespace {
bool branch_count_rec(const Tree& t, const std::set<Letter>& sigma, std::size_t n,
                      std::map<Letter, std::size_t>& counts) {
  bool bump = sigma.count(t.label) != 0;
  if (bump) ++counts[t.label];
  bool ok;
  if (t.children.empty()) {
    ok = std::all_of(sigma.begin(), sigma.end(),
                     [&](const Letter& a) { return counts[a] >= n; });
  } else {
    ok = std::all_of(t.children.begin(), t.children.end(), [&](const Tree& c) {
      return branch_count_rec(c, sigma, n, counts);
    });
  }
  if (bump) --counts[t.label];
  return ok;
}
}  // namespace

bool branch_count_ok(const Tree& t, const std::set<Letter>& sigma, std::size_t n) {
  if (n == 0 || sigma.empty()) return true;
  std::map<Letter, std::size_t> counts;
  for (const Letter& a : sigma) counts[a] = 0;
  return branch_count_rec(t, sigma, n, counts);
}

namespace {
std::set<Tree> resolutions_rec(const Tree& t, std::size_t bound, const Letter& nd,
                               const Letter& bottom, const Letter& unknown) {
  std::set<Tree> out;
  if (bound == 0) return out;
  if (t.label == bottom || t.label == unknown) return out;
  if (t.label == nd && t.children.size() == 2) {
    for (const Tree& c : t.children)
      for (Tree u : resolutions_rec(c, bound, nd, bottom, unknown))
        out.insert(std::move(u));
    return out;
  }
  if (t.label == kHole) throw Error("nd_resolutions: unexpected hole");
  std::vector<std::set<Tree>> parts;
  for (const Tree& c : t.children) {
    parts.push_back(resolutions_rec(c, bound - 1, nd, bottom, unknown));
    if (parts.back().empty()) return out;
  }
  std::vector<Tree> acc(t.children.size());
  auto rec = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (i == parts.size()) {
      out.insert(Tree(t.label, acc));
      return;
    }
    for (const Tree& option : parts[i]) {
      std::size_t sz = option.size();
      if (used + sz > bound) continue;
      acc[i] = option;
      self(self, i + 1, used + sz);
    }
  };
  rec(rec, 0, 1);
  return out;
}
}  // namespace

std::set<Tree> nd_resolutions(const Tree& t, std::size_t size_bound, const Letter& nd,
                              const Letter& bottom, const Letter& unknown) {
  return resolutions_rec(t, size_bound, nd, bottom, unknown);
}

void RegularTree::validate() const {
  if (!equations.count(root)) throw Error("regular tree: undefined root " + root);
  std::map<Letter, int> ranks;
  for (const auto& [name, node] : equations) {
    for (const std::string& ref : node.children)
      if (!equations.count(ref))
        throw Error("regular tree: equation " + name + " references undefined " + ref);
    auto [it, fresh] = ranks.emplace(node.label, static_cast<int>(node.children.size()));
    if (!fresh && it->second != static_cast<int>(node.children.size()))
      throw Error("regular tree: letter " + node.label + " used with two ranks");
  }
}

const RegularTree::Node& RegularTree::at(const std::string& name) const {
  auto it = equations.find(name);
  if (it == equations.end()) throw Error("regular tree: undefined name " + name);
  return it->second;
}

Tree RegularTree::prefix(std::size_t depth) const {
  auto rec = [&](auto&& self, const std::string& name, std::size_t d) -> Tree {
    if (d == 0) return Tree(kUnknown);
    const Node& node = at(name);
    Tree t(node.label);
    for (const std::string& c : node.children) t.children.push_back(self(self, c, d - 1));
    return t;
  };
  return rec(rec, root, depth);
}

std::map<Letter, int> RegularTree::letters() const {
  std::map<Letter, int> out;
  for (const auto& [name, node] : equations) {
    (void)name;
    out[node.label] = static_cast<int>(node.children.size());
  }
  return out;
}

RegularTree parse_regular_tree(const std::string& text) {
  RegularTree rt;
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
    if (first == "root") {
      if (!(ls >> rt.root)) throw ParseError("root needs a name", lineno);
      continue;
    }
    std::string eq;
    if (!(ls >> eq) || eq != "=") throw ParseError("expected '=' in equation", lineno);
    std::string rhs;
    std::getline(ls, rhs);
    Tree shallow = parse_tree(rhs);
    RegularTree::Node node;
    node.label = shallow.label;
    for (const Tree& c : shallow.children) {
      if (!c.children.empty())
        throw ParseError("equation children must be names", lineno);
      node.children.push_back(c.label);
    }
    if (rt.equations.count(first)) throw ParseError("duplicate equation " + first, lineno);
    rt.equations[first] = std::move(node);
  }
  if (rt.root.empty()) throw ParseError("missing 'root' line");
  rt.validate();
  return rt;
}

std::string to_string(const RegularTree& rt) {
  std::string out = "root " + rt.root + "\n";
  for (const auto& [name, node] : rt.equations) {
    out += name + " = " + node.label;
    if (!node.children.empty()) {
      out += '(';
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (i) out += ',';
        out += node.children[i];
      }
      out += ')';
    }
    out += '\n';
  }
  return out;
}

}  // namespace dcl
