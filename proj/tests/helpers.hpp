#pragma once

#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dcl/stre.hpp"
#include "dcl/trees.hpp"

namespace test_helpers {

// All trees over `sigma` with at most `max_size` nodes.  Brute-force
// reference generator; only meant for small bounds.
inline std::set<dcl::Tree> all_trees(const std::map<dcl::Letter, int>& sigma,
                                     std::size_t max_size) {
  using dcl::Tree;
  std::vector<std::set<Tree>> by_size(max_size + 1);
  for (std::size_t sz = 1; sz <= max_size; ++sz) {
    for (const auto& [letter, rank] : sigma) {
      if (rank == 0) {
        if (sz == 1) by_size[sz].insert(Tree(letter));
        continue;
      }
      std::vector<Tree> acc(rank);
      auto rec = [&](auto&& self, int i, std::size_t left) -> void {
        int remaining = rank - i;
        if (remaining == 0) {
          if (left == 0) by_size[sz].insert(Tree(letter, acc));
          return;
        }
        for (std::size_t take = 1; take + (remaining - 1) <= left; ++take) {
          for (const Tree& c : by_size[take]) {
            acc[i] = c;
            self(self, i + 1, left - take);
          }
        }
      };
      rec(rec, 0, sz - 1);
    }
  }
  std::set<Tree> out;
  for (const auto& layer : by_size) out.insert(layer.begin(), layer.end());
  return out;
}

// Random tree regular expression over `sigma`, for fuzzing the rewrite
// system.  Depth bounds the nesting; sums and iterators stay small so the
// inclusion checks behind normalization remain cheap.
inline dcl::Stre random_stre(std::mt19937& rng,
                             const std::vector<std::pair<dcl::Letter, int>>& sigma,
                             int depth) {
  using dcl::ContextEntry;
  using dcl::ContextExpr;
  using dcl::PreProduct;
  using dcl::Stre;
  auto pick = [&rng](int n) { return static_cast<int>(rng() % n); };

  auto gen_sum = [&](auto&& self, int d) -> Stre {
    Stre s;
    int terms = d <= 0 ? pick(2) : pick(3);  // 0..2 summands
    for (int t = 0; t < terms; ++t) {
      const auto& [letter, rank] = sigma[static_cast<std::size_t>(pick(
          static_cast<int>(sigma.size())))];
      PreProduct p;
      if (d <= 0 || pick(3) < 2) {
        p.kind = PreProduct::Kind::Optional;
        p.letter = letter;
        for (int i = 0; i < rank; ++i) p.children.push_back(self(self, d - 1));
      } else {
        p.kind = PreProduct::Kind::Iterate;
        int ctxs = 1 + pick(2);
        for (int c = 0; c < ctxs; ++c) {
          const auto& [cl, cr] = sigma[static_cast<std::size_t>(pick(
              static_cast<int>(sigma.size())))];
          ContextExpr ctx;
          ctx.letter = cl;
          for (int i = 0; i < cr; ++i) {
            ContextEntry e;
            e.hole = pick(2) == 0;
            if (!e.hole) e.expr = self(self, d - 1);
            ctx.entries.push_back(std::move(e));
          }
          p.contexts.push_back(std::move(ctx));
        }
        p.body = self(self, d - 1);
      }
      s.sum.push_back(std::move(p));
    }
    return s;
  };
  return gen_sum(gen_sum, depth);
}

}  // namespace test_helpers
