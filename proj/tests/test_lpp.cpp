#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fluctlab/dist.hpp"
#include "fluctlab/ensemble.hpp"
#include "fluctlab/lpp.hpp"

using namespace fluctlab;

namespace {

ExplicitWeights random_weights(std::int64_t n, std::int64_t m, std::mt19937_64& gen, bool integers = false) {
  ExplicitWeights w(n, m);
  std::exponential_distribution<double> e(1.0);
  std::uniform_int_distribution<int> small(0, 3);
  for (double& v : w.w) v = integers ? small(gen) : e(gen);
  return w;
}

LppOutcome dp(const GridShape& g, const ExplicitWeights& w, FieldOptions opts = {}) {
  return sample_last_passage(g, WeightSpec{w}, {0, 0}, std::move(opts));
}

// Best path constrained to the bottom row up to column a, by enumeration.
double brute_pinned(const GridShape& g, const ExplicitWeights& w, std::int64_t a) {
  const int steps = static_cast<int>(g.n_cols + g.n_rows);
  double best = -1.0;
  for (std::uint32_t mask = 0; mask < (1u << steps); ++mask) {
    if (std::popcount(mask) != static_cast<int>(g.n_cols)) continue;
    std::int64_t i = 0, j = 0;
    double total = w(0, 0);
    bool ok = true;
    for (int s = 0; s < steps; ++s) {
      if (mask >> s & 1u) ++i;
      else ++j;
      if (j > 0 && i < a) ok = false;
      total += w(i, j);
    }
    if (ok) best = std::max(best, total);
  }
  return best;
}

} // namespace

TEST(LastPassage, HandExample) {
  ExplicitWeights w(1, 1);
  w(0, 0) = 0;
  w(1, 0) = 3;
  w(0, 1) = 2;
  w(1, 1) = 1;
  const LppOutcome out = dp({1, 1}, w);
  EXPECT_EQ(out.l2, 4.0);
  EXPECT_EQ(out.x_branch, 4.0);
  EXPECT_EQ(out.y_branch, 3.0);
  EXPECT_EQ(brute_force_last_passage({1, 1}, w), out);
}

TEST(LastPassage, AllZeroWeights) {
  const ExplicitWeights w(4, 3, 0.0);
  EXPECT_EQ(dp({4, 3}, w), (LppOutcome{0, 0, 0}));
}

TEST(BruteForce, DegenerateShapes) {
  ExplicitWeights w(2, 2, 1.0);
  w(0, 0) = 0.5;
  EXPECT_EQ(brute_force_last_passage({0, 0}, w).l2, 0.5);
  const auto col = brute_force_last_passage({0, 2}, w);
  EXPECT_EQ(col.y_branch, 2.5);
  EXPECT_EQ(col.x_branch, 0.0);
  EXPECT_THROW(brute_force_last_passage({7, 6}, ExplicitWeights(7, 6)), InvalidArgument);
}

TEST(BruteForce, DynamicProgramMatchesEnumeration) {
  std::mt19937_64 gen(1);
  for (std::int64_t n = 1; n <= 7; ++n) {
    for (std::int64_t m = 1; n + m <= 8; ++m) {
      for (int k = 0; k < 1000; ++k) {
        const auto w = random_weights(n, m, gen, k % 4 == 0);
        ASSERT_EQ(dp({n, m}, w), brute_force_last_passage({n, m}, w)) << n << 'x' << m << " grid " << k;
      }
    }
  }
}

TEST(LastPassage, MaxDecomposition) {
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto a = sample_last_passage({30, 17}, TwoSided{0.6, 0.8}, {3, r});
    EXPECT_EQ(a.l2, std::max(a.x_branch, a.y_branch));
    const auto b = sample_last_passage({9, 40}, ZeroBoundary{}, {3, r});
    EXPECT_EQ(b.l2, std::max(b.x_branch, b.y_branch));
  }
}

TEST(LastPassage, RowAndColumnSweepsAgree) {
  // N <= M sweeps rows, N > M sweeps columns; the transposed realization
  // with transposed rates must give swapped branches.
  for (std::uint64_t r = 0; r < 50; ++r) {
    const WeightField f({12, 30}, WeightSpec{TwoSided{0.4, 0.7}}, {8, r});
    ExplicitWeights w(12, 30), wt(30, 12);
    for (std::int64_t i = 0; i <= 12; ++i)
      for (std::int64_t j = 0; j <= 30; ++j) w(i, j) = wt(j, i) = f.at(i, j);
    const auto a = last_passage(f);
    const auto b = dp({30, 12}, wt);
    EXPECT_EQ(a.x_branch, b.y_branch);
    EXPECT_EQ(a.y_branch, b.x_branch);
    EXPECT_EQ(a, dp({12, 30}, w));
  }
}

TEST(LastPassage, FieldRowsMatchSites) {
  const WeightField f({9, 7}, WeightSpec{TwoSided{0.3, 0.5}}, {4, 2});
  std::vector<double> row(10), col(8);
  for (std::int64_t j = 0; j <= 7; ++j) {
    f.fill_row(j, row);
    for (std::int64_t i = 0; i <= 9; ++i) EXPECT_EQ(row[static_cast<std::size_t>(i)], f.at(i, j));
  }
  for (std::int64_t i = 0; i <= 9; ++i) {
    f.fill_col(i, col);
    for (std::int64_t j = 0; j <= 7; ++j) EXPECT_EQ(col[static_cast<std::size_t>(j)], f.at(i, j));
  }
  EXPECT_EQ(f.at(0, 0), 0.0);
}

TEST(LastPassage, MonotoneInSingleWeights) {
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<int> pick(0, 5);
  std::uniform_real_distribution<double> bump(0.0, 3.0);
  for (int k = 0; k < 500; ++k) {
    const auto w = random_weights(5, 5, gen);
    const auto base = dp({5, 5}, w);
    const WeightPerturbation p{pick(gen), pick(gen), bump(gen)};
    const auto up = dp({5, 5}, w, FieldOptions{false, {p}});
    EXPECT_GE(up.l2, base.l2);
    EXPECT_GE(up.x_branch, base.x_branch);
    EXPECT_GE(up.y_branch, base.y_branch);
  }
}

TEST(LastPassage, Deterministic) {
  const auto a = sample_last_passage({100, 80}, TwoSided{0.5, 0.7}, {11, 4});
  const auto b = sample_last_passage({100, 80}, TwoSided{0.5, 0.7}, {11, 4});
  const auto c = sample_last_passage({100, 80}, TwoSided{0.5, 0.7}, {11, 5});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(LastPassage, PassageTableMatchesDp) {
  const WeightField f({15, 11}, WeightSpec{TwoSided{0.6, 0.4}}, {21, 0});
  const auto table = last_passage_table(f);
  for (std::int64_t n = 1; n <= 15; ++n)
    for (std::int64_t m = 1; m <= 11; ++m) {
      const WeightField g({n, m}, WeightSpec{TwoSided{0.6, 0.4}}, {21, 0});
      EXPECT_EQ(table[static_cast<std::size_t>(n + 16 * m)], last_passage(g).l2);
    }
}

TEST(Coupling, UnitRatesAreUnchanged) {
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto p = couple_divide_by_mean({40, 40}, {1.0, 1.0}, {5, r});
    EXPECT_EQ(p.original, p.tilded);
  }
}

TEST(Coupling, DominationAndStandardModel) {
  for (std::uint64_t r = 0; r < 2000; ++r) {
    const auto p = couple_divide_by_mean({25, 25}, {0.9, 0.9}, {6, r});
    ASSERT_GE(p.original.x_branch, p.tilded.x_branch);
    ASSERT_GE(p.original.y_branch, p.tilded.y_branch);
    // The tilded model has unit-rate boundaries.
    ASSERT_EQ(p.tilded, sample_last_passage({25, 25}, TwoSided{1.0, 1.0}, {6, r}));
  }
  EXPECT_THROW(couple_divide_by_mean({5, 5}, {1.2, 0.5}, {0, 0}), InvalidArgument);
}

TEST(Coupling, GapShrinksWithSize) {
  auto median_gap = [](std::int64_t n, std::uint64_t reps) {
    const double scale = std::pow(2.0, 4.0 / 3.0) * std::cbrt(static_cast<double>(n));
    std::vector<double> gaps;
    for (std::uint64_t r = 0; r < reps; ++r) {
      const auto p = couple_divide_by_mean({n, n}, {0.9, 0.9}, {7, r});
      gaps.push_back((p.original.l2 - p.tilded.l2) / scale);
    }
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    return gaps[gaps.size() / 2];
  };
  EXPECT_LT(median_gap(800, 100), median_gap(100, 400));
}

TEST(Pinned, FractionAndDomination) {
  EXPECT_NEAR(bottom_pin_fraction(0.3, {1.0}), 40.0 / 49.0, 1e-14);
  EXPECT_NEAR(left_pin_fraction(0.3, {1.0}), 40.0 / 49.0, 1e-14);
  const WeightSpec spec = TwoSided{0.3, 0.3};
  for (std::uint64_t r = 0; r < 500; ++r) {
    const auto o = sample_last_passage({40, 40}, spec, {9, r});
    EXPECT_EQ(pinned_passage_time({40, 40}, spec, {9, r}, PinEdge::Bottom, 0.0), o.x_branch);
    EXPECT_EQ(pinned_passage_time({40, 40}, spec, {9, r}, PinEdge::Left, 0.0), o.y_branch);
    EXPECT_LE(pinned_passage_time({40, 40}, spec, {9, r}, PinEdge::Bottom, 40.0 / 49.0), o.x_branch);
    EXPECT_LE(pinned_passage_time({40, 40}, spec, {9, r}, PinEdge::Left, 0.5), o.y_branch);
  }
  EXPECT_THROW(pinned_passage_time({4, 4}, spec, {0, 0}, PinEdge::Bottom, 1.5), InvalidArgument);
}

TEST(Pinned, MatchesEnumeration) {
  std::mt19937_64 gen(3);
  for (int k = 0; k < 200; ++k) {
    const auto w = random_weights(5, 4, gen);
    for (double f : {0.0, 0.2, 0.5, 0.8, 1.0}) {
      const auto a = std::max<std::int64_t>(static_cast<std::int64_t>(std::floor(f * 5)), 1);
      EXPECT_EQ(pinned_passage_time({5, 4}, WeightSpec{w}, {0, 0}, PinEdge::Bottom, f), brute_pinned({5, 4}, w, a));
    }
  }
}

TEST(Thick, UnitThicknessIsTwoSided) {
  const Thick t{1, 1, {0.4}, {0.7}, {0.0}, {0.0}};
  for (std::uint64_t r = 0; r < 50; ++r)
    EXPECT_EQ(thick_boundary_sample({30, 20}, t, {12, r}), sample_last_passage({30, 20}, TwoSided{0.4, 0.7}, {12, r}));
}

TEST(Thick, ZeroBottomRowIsOneSided) {
  const Thick t{1, 1, {kInfiniteRate}, {0.6}, {}, {}};
  for (std::uint64_t r = 0; r < 50; ++r)
    EXPECT_EQ(thick_boundary_sample({20, 20}, t, {13, r}), sample_last_passage({20, 20}, OneSided{0.6}, {13, r}));
}

TEST(Thick, Layout) {
  const Thick t{2, 3, {0.5, 0.5}, {0.6, 0.6, 0.6}, {1.0, -0.4}, {0.0, 0.0, 0.0}};
  const GridShape g{10, 8};
  const WeightField f(g, WeightSpec{t}, {14, 0});
  for (std::int64_t i = 0; i < 3; ++i)
    for (std::int64_t j = 0; j < 2; ++j) EXPECT_EQ(f.at(i, j), 0.0);
  // Perturbations scale with M^{1/3} = 2.
  EXPECT_NEAR(f.inverse_rate(5, 0), 1.0 / (0.5 + 0.5), 1e-14);
  EXPECT_NEAR(f.inverse_rate(5, 1), 1.0 / (0.5 - 0.2), 1e-14);
  EXPECT_NEAR(f.inverse_rate(1, 6), 1.0 / 0.6, 1e-14);
  EXPECT_EQ(f.inverse_rate(5, 4), 1.0);

  EXPECT_THROW(thick_boundary_sample(g, Thick{1, 1, {0.1}, {0.5}, {-3.0}, {0.0}}, {0, 0}), InvalidArgument);
  EXPECT_THROW(thick_boundary_sample(g, Thick{2, 1, {0.5}, {0.5}, {}, {}}, {0, 0}), InvalidArgument);
  EXPECT_THROW(thick_boundary_sample({2, 2}, Thick{1, 3, {0.5}, {0.5, 0.5, 0.5}, {}, {}}, {0, 0}), InvalidArgument);
}

TEST(Thick, BranchesMatchEnumeration) {
  // X avoids {i < I, j >= J}, so it passes through (I, J-1); Y avoids
  // {i >= I, j < J}, so it passes through (I-1, J).
  for (std::uint64_t r = 0; r < 100; ++r) {
    const std::int64_t cols = 1 + static_cast<std::int64_t>(r % 3), rows = 1 + static_cast<std::int64_t>(r % 2);
    const Thick t{rows, cols, std::vector<double>(static_cast<std::size_t>(rows), 0.4),
                  std::vector<double>(static_cast<std::size_t>(cols), 0.7), {}, {}};
    const GridShape g{6, 5};
    const WeightField f(g, WeightSpec{t}, {15, r});
    const int steps = 11;
    double bx = 0.0, by = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << steps); ++mask) {
      if (std::popcount(mask) != 6) continue;
      std::int64_t i = 0, j = 0;
      double total = f.at(0, 0);
      bool in_x = true, in_y = true;
      for (int s = 0; s < steps; ++s) {
        if (mask >> s & 1u) ++i;
        else ++j;
        if (i < cols && j >= rows) in_x = false;
        if (i >= cols && j < rows) in_y = false;
        total += f.at(i, j);
      }
      if (in_x) bx = std::max(bx, total);
      if (in_y) by = std::max(by, total);
    }
    const auto out = thick_boundary_sample(g, t, {15, r});
    EXPECT_EQ(out.x_branch, bx);
    EXPECT_EQ(out.y_branch, by);
    EXPECT_EQ(out.l2, std::max(bx, by));
  }
}

TEST(Johansson, CenteringAtFiveHundred) {
  const auto out = run_ensemble({500, 500}, ZeroBoundary{}, 31, 40);
  double mean = 0;
  for (const auto& o : out) mean += o.l2 / 40.0;
  EXPECT_LT(std::abs(mean / 2000.0 - 1.0), 0.05);
}

TEST(Ensemble, IndependentOfThreadCount) {
  const auto a = run_ensemble({60, 50}, TwoSided{0.7, 0.6}, 17, 64, 1);
  const auto b = run_ensemble({60, 50}, TwoSided{0.7, 0.6}, 17, 64, 4);
  const auto c = run_ensemble({60, 50}, TwoSided{0.7, 0.6}, 17, 1, 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(c[0], sample_last_passage({60, 50}, TwoSided{0.7, 0.6}, {17, 0}));
  EXPECT_THROW(run_ensemble({5, 5}, ZeroBoundary{}, 1, 0), InvalidArgument);
}

TEST(Ensemble, PropagatesErrors) {
  EXPECT_THROW(run_replicas(
                   10,
                   [](std::uint64_t r) {
                     if (r == 7) throw WindowBreach("x");
                     return r;
                   },
                   2),
               WindowBreach);
}
