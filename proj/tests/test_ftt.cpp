#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "dcl/fta.hpp"
#include "dcl/ftt.hpp"
#include "dcl/stre.hpp"
#include "dcl/trees.hpp"
#include "helpers.hpp"

using namespace dcl;

namespace {

Stre e(const std::string& s) { return parse_stre(s); }
Tree t(const std::string& s) { return parse_tree(s); }

Stre single(PreProduct p) {
  Stre s;
  s.sum.push_back(std::move(p));
  return s;
}

PreProduct pp(const std::string& s) { return parse_stre(s).sum.at(0); }

bool contains_message(const std::exception& ex, const std::string& needle) {
  return std::string(ex.what()).find(needle) != std::string::npos;
}

int count_label(const Tree& u, const Letter& l) {
  int n = u.label == l ? 1 : 0;
  for (const Tree& c : u.children) n += count_label(c, l);
  return n;
}

Tree relabel(const Tree& u, const std::map<Letter, Letter>& ren) {
  Tree out(ren.count(u.label) ? ren.at(u.label) : u.label);
  for (const Tree& c : u.children) out.children.push_back(relabel(c, ren));
  return out;
}

std::set<Tree> image_by_hand(const Ftt& a, const std::set<Tree>& inputs,
                             std::size_t bound) {
  std::set<Tree> out;
  for (const Tree& u : inputs) {
    std::set<Tree> one = apply_to_tree(a, u, bound);
    out.insert(one.begin(), one.end());
  }
  return out;
}

const char* kSample =
    "states p\n"
    "init p\n"
    "p, a(x1,x2) -> a((p,x1),(p,x2))\n"
    "p, a(x1,x2) -> (p,x1)\n";

}  // namespace

TEST_CASE("ftt: parse and print round trip") {
  Ftt a = parse_ftt(kSample);
  CHECK(to_string(a) == kSample);
  CHECK(a.states == std::vector<std::string>{"p"});
  CHECK(a.initial == "p");
  CHECK(a.rules.size() == 2);
  CHECK(a.input.rank("a") == 2);
  CHECK(a.output.rank("a") == 2);

  std::string growing =
      "states p q\n"
      "init p\n"
      "p, x -> a((q,x))\n"
      "q, c -> c\n";
  Ftt g = parse_ftt(growing);
  CHECK(to_string(g) == growing);
  CHECK(g.rules.at(0).any);
  CHECK(g.rules.at(1).rhs == FttRhs{false, "c", {}, "", 0});
  CHECK(to_string(parse_ftt(to_string(g))) == to_string(g));

  // comments and spacing are free
  Ftt spaced = parse_ftt(
      "states p -- one state\n"
      "init p\n"
      "p , a( x1 , x2 ) ->  a( (p,x1) , (p , x2) )\n");
  CHECK(to_string(spaced) == "states p\ninit p\np, a(x1,x2) -> a((p,x1),(p,x2))\n");
}

TEST_CASE("ftt: parse errors") {
  const char* bad[] = {
      "states p\np, a(x1) -> (p,x1)\n",              // missing init
      "states p\ninit p\np, a(x1) (p,x1)\n",         // missing arrow
      "states p\ninit p\np a(x1) -> (p,x1)\n",       // missing comma
      "states p\ninit p\np, a(x2) -> (p,x2)\n",      // variables out of order
      "states p\ninit p\np, a(x1) -> (p,y1)\n",      // bad variable name
      "states p\ninit p\np, a(x1) -> (p,x1) c\n",    // trailing junk
      "states p p\ninit p\n",                        // duplicate state
      "states p\ninit p\np, a(x1) -> b((p,x1))\np, a -> a\n",  // rank clash
  };
  for (const char* text : bad) {
    try {
      parse_ftt(text);
      FAIL("expected a parse error for: " << text);
    } catch (const ParseError&) {
    }
  }

  // undeclared states surface through validation
  CHECK_THROWS_AS(parse_ftt("states p\ninit q\n"), Error);
  CHECK_THROWS_AS(parse_ftt("states p\ninit p\np, c -> (q,x1)\n"), Error);
}

TEST_CASE("ftt: validation rejects malformed rules") {
  Ftt a = parse_ftt(kSample);

  Ftt bad_var = a;
  bad_var.rules[1].rhs.var = 3;
  CHECK_THROWS_AS(bad_var.validate(), Error);

  Ftt bad_any = a;
  bad_any.rules[1].any = true;  // keeps var 1, any-rules must use x
  CHECK_THROWS_AS(bad_any.validate(), Error);

  Ftt bad_arity = a;
  bad_arity.rules[0].rhs.children.pop_back();
  CHECK_THROWS_AS(bad_arity.validate(), Error);

  Ftt bad_letter = a;
  bad_letter.rules[0].letter = "zz";
  CHECK_THROWS_AS(bad_letter.validate(), Error);
}

TEST_CASE("ftt: linearity") {
  CHECK(is_linear(parse_ftt(kSample)));
  Ftt dup = parse_ftt(
      "states p\n"
      "init p\n"
      "p, a(x1,x2) -> b((p,x1),(p,x1))\n");
  CHECK_FALSE(is_linear(dup));
  Ftt dup_any = parse_ftt(
      "states p\n"
      "init p\n"
      "p, x -> b((p,x),(p,x))\n"
      "p, c -> c\n");
  CHECK_FALSE(is_linear(dup_any));

  Nfta b = nfta_for_trees(stre_alphabet(e("a?(c?(), c?())")), {t("a(c,c)")});
  try {
    apply_to_nfta(dup, b);
    FAIL("expected apply_to_nfta to reject a nonlinear transducer");
  } catch (const Error& ex) {
    CHECK(contains_message(ex, "linear"));
  }
}

TEST_CASE("ftt: apply_to_tree basics") {
  Ftt ident = parse_ftt(
      "states p\n"
      "init p\n"
      "p, a(x1,x2) -> a((p,x1),(p,x2))\n"
      "p, b -> b\n"
      "p, c -> c\n");
  CHECK(apply_to_tree(ident, t("a(b,c)"), 10) == std::set<Tree>{t("a(b,c)")});
  CHECK(apply_to_tree(ident, t("a(b,c)"), 2).empty());   // output too big
  CHECK(apply_to_tree(ident, t("a(b,d)"), 10).empty());  // no rule for d

  Ftt mute;
  mute.input.add("c", 0);
  mute.states = {"p"};
  mute.initial = "p";
  CHECK(apply_to_tree(mute, t("c"), 10).empty());

  // any-rules may pump the output without consuming input
  Ftt grow = parse_ftt(
      "states p\n"
      "init p\n"
      "p, x -> a((p,x))\n"
      "p, c -> c\n");
  std::set<Tree> want{t("c"), t("a(c)"), t("a(a(c))"), t("a(a(a(c)))")};
  CHECK(apply_to_tree(grow, t("c"), 4) == want);
}

TEST_CASE("ftt: downward transducer matches the embedding closure") {
  RankedAlphabet sigma = stre_alphabet(e("a?((b1(#))*.c?(), (b2(#))*.c?())"));
  Ftt down = builder_downward(sigma);
  CHECK(is_linear(down));
  Tree big = t("a(b1(c),b2(c))");

  std::set<Tree> outs = apply_to_tree(down, big, big.size());
  std::set<Tree> want;
  for (const Tree& u : test_helpers::all_trees(sigma.letters(), big.size()))
    if (embeds(u, big)) want.insert(u);
  CHECK(outs == want);
  CHECK(outs.count(big) == 1);
  CHECK(outs.count(t("c")) == 1);
  CHECK(outs.count(t("a(c,c)")) == 1);
  CHECK(outs.count(t("b2(b1(c))")) == 0);

  // image of a singleton equals the denotation of the matching expression
  Nfta b = nfta_for_trees(sigma, {big});
  Nfta img = apply_to_nfta(down, b);
  CHECK(equivalent(img, to_nfta(e("a?(b1?(c?()), b2?(c?()))"))));
  CHECK(includes(img, b));

  // closure languages are fixed points of the closure transducer
  for (const char* expr :
       {"a?((b1(#))*.c?(), (b2(#))*.c?())", "(b1(#))*.c?() + a?(c?(), c?())"}) {
    Nfta l = to_nfta(e(expr));
    Ftt d2 = builder_downward(stre_alphabet(e(expr)));
    CHECK(equivalent(apply_to_nfta(d2, l), l));
  }
}

TEST_CASE("ftt: apply_to_nfta agrees with tree-level application") {
  // size-preserving: marking
  PreProduct p = pp("a?(b?(), b?())");
  Ftt mark = builder_mark(p);
  Nfta lang = to_nfta(single(p));
  CHECK(equivalent(
      nfta_for_trees(mark.output, image_by_hand(mark, enumerate_members(lang, 4), 4)),
      nfta_for_trees(mark.output, enumerate_members(apply_to_nfta(mark, lang), 4))));

  // size-nondecreasing: padding
  Diversified d = diversify(pp("(a(#, b?()))*.c?()"));
  Ftt pad = builder_pad(d);
  Nfta padded = apply_to_nfta(pad, nfta_for_trees(pad.input, {t("a_1(c_1,b_1)")}));
  CHECK(enumerate_members(padded, 7) ==
        apply_to_tree(pad, t("a_1(c_1,b_1)"), 7));

  // finite input: downward closure
  RankedAlphabet sigma = stre_alphabet(e("a?(b?(c?()), c?())"));
  Ftt down = builder_downward(sigma);
  std::set<Tree> ins{t("a(b(c),c)"), t("b(c)")};
  Nfta fin = nfta_for_trees(sigma, ins);
  CHECK(enumerate_members(apply_to_nfta(down, fin), 5) == image_by_hand(down, ins, 5));
}

TEST_CASE("ftt: intersect builder runs the automaton") {
  RankedAlphabet sigma = stre_alphabet(e("a?(b?(), c?())"));
  Nfta r = to_nfta(e("a?(b?(), c?())"));
  Ftt inter = builder_intersect(r);
  CHECK(is_linear(inter));
  CHECK(apply_to_tree(inter, t("a(b,c)"), 5) == std::set<Tree>{t("a(b,c)")});
  CHECK(apply_to_tree(inter, t("a(c,b)"), 5).empty());

  for (const char* expr : {"a?(b?(), b?()) + c?()", "a?(a?(b?(), c?()), c?())"}) {
    Nfta lang = to_nfta(e(expr));
    CHECK(equivalent(apply_to_nfta(inter, lang), product(lang, r)));
  }
  Nfta everything = nfta_all(sigma);
  CHECK(equivalent(apply_to_nfta(inter, everything), r));

  // multiple final states
  Nfta two = union_of(to_nfta(e("b?()")), to_nfta(e("c?()")));
  Nfta img = apply_to_nfta(builder_intersect(two), everything);
  CHECK(equivalent(img, two));

  // empty automaton -> empty image
  Nfta none;
  none.alphabet = sigma;
  none.add_state("q");
  CHECK(is_empty(apply_to_nfta(builder_intersect(none), everything)));
}

TEST_CASE("ftt: mark transducer and unmarking") {
  PreProduct p = pp("a?(b?(), b?())");
  Diversified d = diversify(p);
  Ftt mark = builder_mark(p);
  CHECK(is_linear(mark));

  std::set<Tree> outs = apply_to_tree(mark, t("a(b,b)"), 3);
  std::set<Tree> want{t("a_1(b_1,b_1)"), t("a_1(b_1,b_2)"), t("a_1(b_2,b_1)"),
                      t("a_1(b_2,b_2)")};
  CHECK(outs == want);
  for (const Tree& u : outs) CHECK(relabel(u, d.original) == t("a(b,b)"));

  // marked membership mirrors plain membership
  Stre plain = single(p);
  Stre marked = single(d.product);
  for (const Tree& u : test_helpers::all_trees(mark.input.letters(), 3)) {
    bool any_marked = false;
    for (const Tree& v : apply_to_tree(mark, u, u.size()))
      any_marked = any_marked || member(v, marked);
    CHECK(any_marked == member(u, plain));
  }
}

TEST_CASE("ftt: padding grows clean branches") {
  Diversified d = diversify(pp("(a(#, b?()))*.c?()"));
  Ftt pad = builder_pad(d);
  CHECK(is_linear(pad));

  // only the branch avoiding c_1 may grow, by chains of a_1 ending in b_1
  std::set<Tree> outs = apply_to_tree(pad, t("a_1(c_1,b_1)"), 7);
  std::set<Tree> want{t("a_1(c_1,b_1)"), t("a_1(c_1,a_1(b_1,b_1))"),
                      t("a_1(c_1,a_1(a_1(b_1,b_1),b_1))")};
  CHECK(outs == want);

  // both branches reach c_1: the tree only maps to itself
  CHECK(apply_to_tree(pad, t("a_1(c_1,c_1)"), 12) ==
        std::set<Tree>{t("a_1(c_1,c_1)")});

  // the padded branch carries arbitrarily many iterate roots
  for (int n = 1; n <= 4; ++n) {
    bool found = false;
    for (const Tree& u : apply_to_tree(pad, t("a_1(c_1,b_1)"), 3 + 2 * n))
      found = found || count_label(u, "a_1") >= n + 1;
    CHECK(found);
  }

  // nested iterates pad with the letter whose body root is missing
  Diversified d2 = diversify(pp("(a(#))*.(b(#))*.c?()"));
  Ftt pad2 = builder_pad(d2);
  CHECK(apply_to_tree(pad2, t("a_1(c_1)"), 4) ==
        std::set<Tree>{t("a_1(c_1)"), t("a_1(a_1(c_1))"), t("a_1(a_1(a_1(c_1)))")});
  CHECK(apply_to_tree(pad2, t("a_1(b_1(c_1))"), 6) ==
        std::set<Tree>{t("a_1(b_1(c_1))")});
  CHECK(apply_to_tree(pad2, t("b_1(c_1)"), 6) == std::set<Tree>{t("b_1(c_1)")});

  // the image automaton keeps growing beyond any tree-level bound
  Nfta img = apply_to_nfta(pad2, nfta_for_trees(pad2.input, {t("a_1(c_1)")}));
  CHECK(member(img, t("a_1(a_1(a_1(a_1(a_1(c_1)))))")));
  CHECK_FALSE(member(img, t("b_1(c_1)")));
  CHECK_FALSE(member(img, t("c_1")));
}

TEST_CASE("ftt: empty languages stay empty through images") {
  // the only automaton transition leans on an uninhabited state
  Ftt drop = parse_ftt(
      "states p\n"
      "init p\n"
      "p, a(x1,x2) -> b((p,x1))\n"
      "p, c -> c\n");
  Nfta b;
  b.alphabet.add("a", 2);
  b.alphabet.add("c", 0);
  int q0 = b.add_state("q0");
  int qdead = b.add_state("qdead");
  int qf = b.add_state("qf");
  b.add_rule("c", {}, q0);
  b.add_rule("a", {q0, qdead}, qf);
  b.final_states = {qf};
  CHECK(is_empty(b));
  CHECK(is_empty(apply_to_nfta(drop, b)));

  // constant any-rules must not conjure outputs out of nothing
  Ftt constant = parse_ftt(
      "states p\n"
      "init p\n"
      "p, x -> e\n");
  Nfta none;
  none.alphabet.add("c", 0);
  none.add_state("q");
  CHECK(is_empty(apply_to_nfta(constant, none)));
  Nfta one = nfta_for_trees(none.alphabet, {t("c")});
  CHECK(equivalent(apply_to_nfta(constant, one),
                   nfta_for_trees(constant.output, {t("e")})));
}
