#include <doctest.h>

#include <random>

#include "dcl/trees.hpp"
#include "helpers.hpp"

using namespace dcl;
using test_helpers::all_trees;

namespace {

// Direct recursive check that `t` is one way of resolving the choices in
// `orig`, written independently of nd_resolutions.
bool is_resolution(const Tree& t, const Tree& orig) {
  if (orig.label == "nd" && orig.children.size() == 2)
    return is_resolution(t, orig.children[0]) || is_resolution(t, orig.children[1]);
  if (orig.label == kBottom || orig.label == kUnknown) return false;
  if (t.label != orig.label || t.children.size() != orig.children.size()) return false;
  for (std::size_t i = 0; i < t.children.size(); ++i)
    if (!is_resolution(t.children[i], orig.children[i])) return false;
  return true;
}

Tree random_tree(std::mt19937& rng, int depth_left) {
  static const std::vector<std::pair<Letter, int>> letters = {
      {"a", 2}, {"b", 1}, {"c", 0}, {"d", 0}};
  std::uniform_int_distribution<std::size_t> pick(
      0, depth_left > 0 ? letters.size() - 1 : letters.size() - 2);
  auto [label, rank] = letters[depth_left > 0 ? pick(rng) : 2 + pick(rng) % 2];
  Tree t(label);
  for (int i = 0; i < rank; ++i)
    t.children.push_back(random_tree(rng, depth_left - 1));
  return t;
}

}  // namespace

TEST_CASE("tree parse / print round trip") {
  for (const char* text : {"a", "a(b,c)", "f(g(x),y,z)", "b''(x_1)", "nd(bot,unknown)"}) {
    Tree t = parse_tree(text);
    CHECK(to_string(t) == text);
    CHECK(parse_tree(to_string(t)) == t);
  }
  CHECK(parse_tree("  a ( b , c ) ") == parse_tree("a(b,c)"));
  CHECK(parse_tree("a()") == parse_tree("a"));
  CHECK(parse_tree("a(b,c) -- trailing note") == parse_tree("a(b,c)"));
  CHECK(parse_tree("a( -- children follow\n  b, c)") == parse_tree("a(b,c)"));
  CHECK_THROWS_AS(parse_tree(""), ParseError);
  CHECK_THROWS_AS(parse_tree("a(b"), ParseError);
  CHECK_THROWS_AS(parse_tree("a(b,)"), ParseError);
  CHECK_THROWS_AS(parse_tree("a b"), ParseError);
  CHECK_THROWS_AS(parse_tree(")"), ParseError);
}

TEST_CASE("tree size and depth") {
  CHECK(parse_tree("a").size() == 1);
  CHECK(parse_tree("a").depth() == 1);
  CHECK(parse_tree("a(b,c(d))").size() == 4);
  CHECK(parse_tree("a(b,c(d))").depth() == 3);
}

TEST_CASE("observed_letters collects ranks and rejects conflicts") {
  auto m = observed_letters(parse_tree("a(b(c),c)"));
  CHECK(m == std::map<Letter, int>{{"a", 2}, {"b", 1}, {"c", 0}});
  CHECK_THROWS_AS(observed_letters(parse_tree("a(a)")), Error);
}

TEST_CASE("ranked alphabet guards") {
  RankedAlphabet sigma;
  sigma.add("a", 2);
  sigma.add("a", 2);  // idempotent
  CHECK_THROWS_AS(sigma.add("a", 1), Error);
  CHECK_THROWS_AS(sigma.add("#", 0), Error);
  CHECK_THROWS_AS(sigma.add("x", -1), Error);
  sigma.add("nd", 2);
  sigma.add("bot", 0);
  CHECK(sigma.nd == Letter("nd"));
  CHECK(sigma.bottom == Letter("bot"));
  sigma.validate();

  RankedAlphabet bad;
  bad.add("nd", 1);
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("merge_alphabets") {
  RankedAlphabet a, b;
  a.add("a", 2);
  a.add("c", 0);
  b.add("b", 1);
  b.add("c", 0);
  RankedAlphabet m = merge_alphabets(a, b);
  CHECK(m.contains("a"));
  CHECK(m.contains("b"));
  CHECK(m.rank("c") == 0);
  b.add("a", 1);
  CHECK_THROWS_AS(merge_alphabets(a, b), Error);
}

TEST_CASE("embedding basics") {
  CHECK(embeds(parse_tree("b"), parse_tree("a(b,c)")));
  CHECK(embeds(parse_tree("a(b,c)"), parse_tree("a(b,c)")));
  CHECK_FALSE(embeds(parse_tree("a(c,b)"), parse_tree("a(b,c)")));
  // match at the root, then descend inside the first child
  CHECK(embeds(parse_tree("a(b,b)"), parse_tree("a(a(b,c),b)")));
  CHECK(embeds(parse_tree("a(b,c)"), parse_tree("b(a(b,c))")));  // descend through b
  CHECK_FALSE(embeds(parse_tree("a(b,b)"), parse_tree("a(c,b)")));
  CHECK_FALSE(embeds(parse_tree("a(b,c)"), parse_tree("c")));
}

TEST_CASE("embedding is a well-behaved order on random trees") {
  std::mt19937 rng(7);
  std::vector<Tree> pool;
  for (int i = 0; i < 40; ++i) pool.push_back(random_tree(rng, 4));
  for (const Tree& t : pool) CHECK(embeds(t, t));
  for (const Tree& s : pool)
    for (const Tree& t : pool)
      if (embeds(s, t)) CHECK(s.size() <= t.size());
  // transitivity on a smaller triple set
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      for (int k = 0; k < 12; ++k)
        if (embeds(pool[i], pool[j]) && embeds(pool[j], pool[k]))
          CHECK(embeds(pool[i], pool[k]));
}

TEST_CASE("every subtree embeds") {
  std::mt19937 rng(11);
  for (int i = 0; i < 20; ++i) {
    Tree t = random_tree(rng, 4);
    auto walk = [&](auto&& self, const Tree& s) -> void {
      CHECK(embeds(s, t));
      for (const Tree& c : s.children) self(self, c);
    };
    walk(walk, t);
  }
}

TEST_CASE("substitute fills holes independently") {
  std::set<Tree> fill = {parse_tree("b"), parse_tree("c")};
  auto got = substitute(parse_tree("a(#,#)"), fill);
  std::set<Tree> want = {parse_tree("a(b,b)"), parse_tree("a(b,c)"),
                         parse_tree("a(c,b)"), parse_tree("a(c,c)")};
  CHECK(got == want);
  CHECK(substitute(parse_tree("a(b,c)"), fill) == std::set<Tree>{parse_tree("a(b,c)")});
  CHECK(substitute(parse_tree("#"), fill) == fill);
  CHECK(substitute(parse_tree("a(#,b)"), {}).empty());
  CHECK(count_holes(parse_tree("a(#,b(#))")) == 2);
  CHECK(count_holes(parse_tree("a(b,c)")) == 0);
}

TEST_CASE("branch_count_ok counts per branch") {
  std::set<Letter> sigma = {"a"};
  CHECK(branch_count_ok(parse_tree("a(a(c,c),a(c,c))"), sigma, 2));
  CHECK_FALSE(branch_count_ok(parse_tree("a(a(c,c),c)"), sigma, 2));
  CHECK(branch_count_ok(parse_tree("c"), sigma, 0));
  CHECK(branch_count_ok(parse_tree("c"), {}, 5));
  CHECK_FALSE(branch_count_ok(parse_tree("c"), sigma, 1));
  // both letters must clear the bar on every branch
  std::set<Letter> two = {"a", "b"};
  CHECK(branch_count_ok(parse_tree("a(b(c),b(c))"), two, 1));
  CHECK_FALSE(branch_count_ok(parse_tree("a(b(c),c)"), two, 1));
}

TEST_CASE("nd_resolutions golden cases") {
  CHECK(nd_resolutions(parse_tree("nd(a(b,c),b)"), 10) ==
        std::set<Tree>{parse_tree("a(b,c)"), parse_tree("b")});
  CHECK(nd_resolutions(parse_tree("nd(a(nd(b,c),b),nd(b,c))"), 10) ==
        std::set<Tree>{parse_tree("a(b,b)"), parse_tree("a(c,b)"), parse_tree("b"),
                       parse_tree("c")});
  // independent choice at each occurrence
  CHECK(nd_resolutions(parse_tree("a(nd(b,c),nd(b,c))"), 10) ==
        std::set<Tree>{parse_tree("a(b,b)"), parse_tree("a(b,c)"), parse_tree("a(c,b)"),
                       parse_tree("a(c,c)")});
  // bot and unknown kill the surrounding member
  CHECK(nd_resolutions(parse_tree("nd(bot,b)"), 10) == std::set<Tree>{parse_tree("b")});
  CHECK(nd_resolutions(parse_tree("bot"), 10).empty());
  CHECK(nd_resolutions(parse_tree("a(unknown,b)"), 10).empty());
  // size bound: a(b,c) has three nodes
  CHECK(nd_resolutions(parse_tree("nd(a(b,c),b)"), 2) == std::set<Tree>{parse_tree("b")});
  CHECK(nd_resolutions(parse_tree("nd(a(b,c),b)"), 3) ==
        std::set<Tree>{parse_tree("a(b,c)"), parse_tree("b")});
  CHECK(nd_resolutions(parse_tree("b"), 0).empty());
  CHECK_THROWS_AS(nd_resolutions(parse_tree("a(#,b)"), 5), Error);
}

TEST_CASE("nd_resolutions agrees with the brute-force oracle") {
  std::map<Letter, int> sigma = {{"a", 2}, {"b", 1}, {"c", 0}, {"d", 0}};
  std::mt19937 rng(23);
  // random trees with nd/bot sprinkled in
  auto random_choice_tree = [&](auto&& self, int depth_left) -> Tree {
    std::uniform_int_distribution<int> kind(0, depth_left > 0 ? 6 : 1);
    switch (kind(rng)) {
      case 0: return Tree("c");
      case 1: return Tree("d");
      case 2: return Tree(kBottom);
      case 3: case 4: {
        Tree t("nd");
        t.children.push_back(self(self, depth_left - 1));
        t.children.push_back(self(self, depth_left - 1));
        return t;
      }
      case 5: {
        Tree t("b");
        t.children.push_back(self(self, depth_left - 1));
        return t;
      }
      default: {
        Tree t("a");
        t.children.push_back(self(self, depth_left - 1));
        t.children.push_back(self(self, depth_left - 1));
        return t;
      }
    }
  };
  std::set<Tree> universe = all_trees(sigma, 7);
  for (int i = 0; i < 60; ++i) {
    Tree t = random_choice_tree(random_choice_tree, 4);
    std::set<Tree> got = nd_resolutions(t, 7);
    std::set<Tree> want;
    for (const Tree& cand : universe)
      if (is_resolution(cand, t)) want.insert(cand);
    CHECK(got == want);
  }
}

TEST_CASE("regular tree parse, print, prefix") {
  const char* text =
      "-- infinite tree with one spine\n"
      "root T\n"
      "T = a(T, U)\n"
      "U = b(U)\n";
  RegularTree rt = parse_regular_tree(text);
  CHECK(rt.root == "T");
  CHECK(rt.at("T").label == "a");
  CHECK(rt.at("U").children == std::vector<std::string>{"U"});
  CHECK(rt.letters() == std::map<Letter, int>{{"a", 2}, {"b", 1}});

  CHECK(rt.prefix(0) == parse_tree("unknown"));
  CHECK(rt.prefix(1) == parse_tree("a(unknown,unknown)"));
  CHECK(rt.prefix(2) == parse_tree("a(a(unknown,unknown),b(unknown))"));

  RegularTree back = parse_regular_tree(to_string(rt));
  CHECK(back.root == rt.root);
  CHECK(back.prefix(3) == rt.prefix(3));
}

TEST_CASE("regular tree rejects malformed input") {
  CHECK_THROWS_AS(parse_regular_tree("T = a(T)\n"), ParseError);           // no root
  CHECK_THROWS_AS(parse_regular_tree("root T\n"), Error);                  // undefined root
  CHECK_THROWS_AS(parse_regular_tree("root T\nT = a(U)\n"), Error);        // undefined ref
  CHECK_THROWS_AS(parse_regular_tree("root T\nT = a(T)\nT = b\n"), ParseError);
  CHECK_THROWS_AS(parse_regular_tree("root T\nT = a(b(T))\n"), ParseError);
  CHECK_THROWS_AS(parse_regular_tree("root T\nT = a(T)\nU = a\n"), Error);  // rank clash
}
