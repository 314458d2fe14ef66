#pragma once

// Exponential last passage percolation on {0..N} x {0..M}.
//
// Site (i, j) is column i, row j.  Weights come from a RateLayout: a zero
// block i < I, j < J; boundary rows j < J (i >= I) with per-row rates;
// boundary columns i < I (j >= J) with per-column rates; unit-rate bulk.
// The ordinary two-sided model is I = J = 1.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "fluctlab/error.hpp"
#include "fluctlab/rng.hpp"
#include "fluctlab/theory.hpp"

namespace fluctlab {

inline constexpr double kInfiniteRate = std::numeric_limits<double>::infinity();

/// Stand-in for an infinite weight (a rate-0 exponential).  Large enough to
/// dominate any finite path, small enough that sums over a grid stay finite.
inline constexpr double kInfiniteWeight = 1e250;

// ---------------------------------------------------------------------------
// Weight specifications

struct TwoSided {
  double pi = 1.0;
  double eta = 1.0;
};

/// Zero bottom row, Exp(eta) left column, unit bulk.
struct OneSided {
  double eta = 1.0;
};

/// Zero bottom row and left column; the standard corner-growth model on
/// the bulk sites.
struct ZeroBoundary {};

/// J boundary rows and I boundary columns with rates
/// pi[j] + x[j] / M^{1/3} and eta[i] + y[i] / M^{1/3}.
struct Thick {
  std::int64_t rows = 1;   ///< J
  std::int64_t cols = 1;   ///< I
  std::vector<double> pi;
  std::vector<double> eta;
  std::vector<double> x;
  std::vector<double> y;
};

/// Explicit weights w(i, j), stored at i + (N+1) j.
struct ExplicitWeights {
  std::int64_t n_cols = 0;
  std::int64_t n_rows = 0;
  std::vector<double> w;

  ExplicitWeights() = default;
  ExplicitWeights(std::int64_t n, std::int64_t m, double fill = 0.0)
      : n_cols(n), n_rows(m), w(static_cast<std::size_t>((n + 1) * (m + 1)), fill) {}

  double& operator()(std::int64_t i, std::int64_t j) { return w[static_cast<std::size_t>(i + (n_cols + 1) * j)]; }
  double operator()(std::int64_t i, std::int64_t j) const {
    return w[static_cast<std::size_t>(i + (n_cols + 1) * j)];
  }
};

using WeightSpec = std::variant<TwoSided, OneSided, ZeroBoundary, Thick, ExplicitWeights>;

/// Added to the sampled weight of one site.
struct WeightPerturbation {
  std::int64_t i = 0;
  std::int64_t j = 0;
  double delta = 0.0;
};

/// Rates of every non-bulk site.  A rate of kInfiniteRate is a zero weight;
/// a rate of 0 is an infinite weight.
struct RateLayout {
  std::int64_t cols = 1;              ///< I
  std::int64_t rows = 1;              ///< J
  std::vector<double> row_rate;       ///< size J
  std::vector<double> col_rate;       ///< size I
  std::int64_t row0_zero_through = 0; ///< sites (i, 0) with i <= this are zero
  std::int64_t col0_zero_through = 0; ///< sites (0, j) with j <= this are zero
};

inline void validate_rate(double r, const char* what) {
  detail::require(r > 0.0 && r <= 1.0, std::string(what) + " must lie in (0, 1]");
}

inline RateLayout layout_for(const WeightSpec& spec, const GridShape& shape) {
  RateLayout out;
  if (const auto* s = std::get_if<TwoSided>(&spec)) {
    validate_rate(s->pi, "pi");
    validate_rate(s->eta, "eta");
    out.row_rate = {s->pi};
    out.col_rate = {s->eta};
  } else if (const auto* s = std::get_if<OneSided>(&spec)) {
    validate_rate(s->eta, "eta");
    out.row_rate = {kInfiniteRate};
    out.col_rate = {s->eta};
  } else if (std::holds_alternative<ZeroBoundary>(spec)) {
    out.row_rate = {kInfiniteRate};
    out.col_rate = {kInfiniteRate};
  } else if (const auto* s = std::get_if<Thick>(&spec)) {
    detail::require(s->rows >= 0 && s->cols >= 0 && s->rows + s->cols >= 1, "thick boundary needs J, I >= 0, J+I >= 1");
    const auto J = static_cast<std::size_t>(s->rows), I = static_cast<std::size_t>(s->cols);
    detail::require(s->pi.size() == J && s->eta.size() == I, "thick boundary rate vectors must have lengths J and I");
    detail::require((s->x.empty() || s->x.size() == J) && (s->y.empty() || s->y.size() == I),
                    "thick boundary perturbation vectors must have lengths J and I");
    detail::require(s->cols <= shape.n_cols && s->rows <= shape.n_rows, "shape too small for the zero block");
    const double m13 = std::cbrt(static_cast<double>(shape.n_rows));
    out.rows = s->rows;
    out.cols = s->cols;
    for (std::size_t j = 0; j < J; ++j) {
      const double r = s->pi[j] + (s->x.empty() ? 0.0 : s->x[j] / m13);
      detail::require(r > 0.0, "thick boundary: perturbed row rate must be positive");
      out.row_rate.push_back(r);
    }
    for (std::size_t i = 0; i < I; ++i) {
      const double r = s->eta[i] + (s->y.empty() ? 0.0 : s->y[i] / m13);
      detail::require(r > 0.0, "thick boundary: perturbed column rate must be positive");
      out.col_rate.push_back(r);
    }
  } else {
    throw InvalidArgument("layout_for: explicit weights have no rate layout");
  }
  return out;
}

struct FieldOptions {
  /// Replace each boundary weight by weight * rate (its value divided by its mean).
  bool divide_by_mean = false;
  std::vector<WeightPerturbation> perturbations;
};

/// Weights of one replica on a fixed grid.  fill_row / fill_col produce a
/// whole row or column; columns are generated two at a time since sites
/// (2k, j) and (2k+1, j) share a random block.
class WeightField {
public:
  WeightField(const GridShape& shape, RateLayout layout, const StreamKey& key, FieldOptions opts = {})
      : shape_(shape), layout_(std::move(layout)), rng_(key), opts_(std::move(opts)) {
    shape_.validate();
  }

  WeightField(const GridShape& shape, const WeightSpec& spec, const StreamKey& key, FieldOptions opts = {})
      : shape_(shape), rng_(key), opts_(std::move(opts)) {
    if (const auto* e = std::get_if<ExplicitWeights>(&spec)) {
      detail::require(e->n_cols >= shape.n_cols && e->n_rows >= shape.n_rows,
                      "explicit weight matrix smaller than the grid");
      for (double v : e->w) detail::require(v >= 0.0, "explicit weights must be nonnegative");
      explicit_ = &*e;
    } else {
      shape_.validate();
      layout_ = layout_for(spec, shape);
    }
  }

  const GridShape& shape() const { return shape_; }

  /// Multiplier applied to a unit exponential at (i, j); 0 for zero sites.
  double inverse_rate(std::int64_t i, std::int64_t j) const {
    const bool row_region = j < layout_.rows;
    const bool col_region = i < layout_.cols;
    if (row_region && col_region) return 0.0;
    if (!row_region && !col_region) return 1.0;
    double rate;
    if (row_region) {
      if (j == 0 && i <= layout_.row0_zero_through) return 0.0;
      rate = layout_.row_rate[static_cast<std::size_t>(j)];
    } else {
      if (i == 0 && j <= layout_.col0_zero_through) return 0.0;
      rate = layout_.col_rate[static_cast<std::size_t>(i)];
    }
    if (rate == kInfiniteRate) return 0.0;
    if (opts_.divide_by_mean) return 1.0;
    if (rate == 0.0) return kInfiniteRate;
    return 1.0 / rate;
  }

  double at(std::int64_t i, std::int64_t j) const {
    double w;
    if (explicit_) {
      w = (*explicit_)(i, j);
    } else {
      w = scale(unit_exponential(rng_.site_uniform(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j))),
                inverse_rate(i, j));
    }
    for (const auto& p : opts_.perturbations)
      if (p.i == i && p.j == j) w += p.delta;
    return w;
  }

  /// out[i] = w(i, j) for 0 <= i <= N.
  void fill_row(std::int64_t j, std::span<double> out) const {
    const std::int64_t n = shape_.n_cols;
    if (explicit_) {
      for (std::int64_t i = 0; i <= n; ++i) out[static_cast<std::size_t>(i)] = (*explicit_)(i, j);
    } else {
      const auto jj = static_cast<std::uint32_t>(j);
      for (std::int64_t k = 0; 2 * k <= n; ++k) {
        const auto u = rng_.pair(Stream::LatticeWeights, static_cast<std::uint32_t>(k), jj);
        out[static_cast<std::size_t>(2 * k)] = unit_exponential(u[0]);
        if (2 * k + 1 <= n) out[static_cast<std::size_t>(2 * k + 1)] = unit_exponential(u[1]);
      }
      if (j < layout_.rows) {
        for (std::int64_t i = 0; i <= n; ++i)
          out[static_cast<std::size_t>(i)] = scale(out[static_cast<std::size_t>(i)], inverse_rate(i, j));
      } else {
        const std::int64_t lim = std::min(layout_.cols, n + 1);
        for (std::int64_t i = 0; i < lim; ++i)
          out[static_cast<std::size_t>(i)] = scale(out[static_cast<std::size_t>(i)], inverse_rate(i, j));
      }
    }
    for (const auto& p : opts_.perturbations)
      if (p.j == j && p.i >= 0 && p.i <= n) out[static_cast<std::size_t>(p.i)] += p.delta;
  }

  /// out[j] = w(i, j) for 0 <= j <= M.  Calls for consecutive columns
  /// 2k, 2k+1 reuse one batch of random blocks.
  void fill_col(std::int64_t i, std::span<double> out) const {
    const std::int64_t m = shape_.n_rows;
    if (explicit_) {
      for (std::int64_t j = 0; j <= m; ++j) out[static_cast<std::size_t>(j)] = (*explicit_)(i, j);
    } else {
      const std::int64_t k = i >> 1;
      if (cached_pair_ != k) {
        even_.resize(static_cast<std::size_t>(m + 1));
        odd_.resize(static_cast<std::size_t>(m + 1));
        for (std::int64_t j = 0; j <= m; ++j) {
          const auto u = rng_.pair(Stream::LatticeWeights, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(j));
          even_[static_cast<std::size_t>(j)] = unit_exponential(u[0]);
          odd_[static_cast<std::size_t>(j)] = unit_exponential(u[1]);
        }
        cached_pair_ = k;
      }
      const auto& src = (i & 1) ? odd_ : even_;
      for (std::int64_t j = 0; j <= m; ++j) {
        const auto s = static_cast<std::size_t>(j);
        out[s] = (i < layout_.cols || j < layout_.rows) ? scale(src[s], inverse_rate(i, j)) : src[s];
      }
    }
    for (const auto& p : opts_.perturbations)
      if (p.i == i && p.j >= 0 && p.j <= m) out[static_cast<std::size_t>(p.j)] += p.delta;
  }

private:
  // 1 - u is exact for the 53-bit uniforms of the counter stream.
  static double unit_exponential(double u) { return -std::log(1.0 - u); }
  static double scale(double e, double inv_rate) {
    if (inv_rate == 0.0) return 0.0;
    if (inv_rate == kInfiniteRate) return kInfiniteWeight;
    return e * inv_rate;
  }

  GridShape shape_;
  RateLayout layout_;
  CounterRng rng_;
  FieldOptions opts_;
  const ExplicitWeights* explicit_ = nullptr;
  mutable std::int64_t cached_pair_ = -1;
  mutable std::vector<double> even_, odd_;
};

// ---------------------------------------------------------------------------
// Dynamic program

/// Last passage time to (N, M) and its decomposition by first step.
struct LppOutcome {
  double l2 = 0.0;
  double x_branch = 0.0; ///< first step right
  double y_branch = 0.0; ///< first step up

  friend bool operator==(const LppOutcome&, const LppOutcome&) = default;
};

/// X excludes the rectangle {i < a, j >= b}; Y excludes {i >= c, j < d}.
struct BranchCuts {
  std::int64_t a = 1, b = 1, c = 1, d = 1;

  static BranchCuts standard() { return {}; }
  static BranchCuts thick(std::int64_t cols, std::int64_t rows) { return {cols, rows, cols, rows}; }
};

namespace detail {

inline constexpr double kForbidden = std::numeric_limits<double>::lowest();

/// Values below this are unreachable cells.  Adding finite weights to
/// kForbidden leaves it far below the threshold.
inline constexpr double kUnreachable = -1e300;

/// One line of the rolling front.  Cells outside [lo, hi] are forbidden;
/// `origin` marks the line containing (0, 0).
inline void advance_line(double* line, const double* w, std::int64_t width, std::int64_t lo, std::int64_t hi,
                         bool origin) {
  for (std::int64_t c = 0; c < std::min(lo, width + 1); ++c) line[c] = kForbidden;
  if (lo <= hi) {
    std::int64_t c = lo;
    if (origin) {
      double left = kForbidden;
      for (; c <= hi; ++c) {
        const double best = c == 0 ? 0.0 : left;
        line[c] = left = best + w[c];
      }
    } else {
      double left = kForbidden;
      for (; c <= hi; ++c) line[c] = left = std::max(line[c], left) + w[c];
    }
  }
  for (std::int64_t c = std::max(hi + 1, std::int64_t{0}); c <= width; ++c) line[c] = kForbidden;
}

/// Rolling-front evaluation of the two restricted passage times.  Memory is
/// O(min(N, M)): the shorter side is the inner dimension.
inline LppOutcome restricted_passage(const WeightField& field, const BranchCuts& cut) {
  const std::int64_t n = field.shape().n_cols, m = field.shape().n_rows;
  const bool by_rows = n <= m;
  const std::int64_t width = by_rows ? n : m;
  const std::int64_t outer = by_rows ? m : n;

  std::vector<double> w(static_cast<std::size_t>(width + 1));
  std::vector<double> lx(w.size(), kForbidden), ly(w.size(), kForbidden);

  for (std::int64_t r = 0; r <= outer; ++r) {
    std::int64_t xlo = 0, xhi = width, ylo = 0, yhi = width;
    if (by_rows) {
      field.fill_row(r, w);
      if (r >= cut.b) xlo = cut.a;
      if (r < cut.d) yhi = cut.c - 1;
    } else {
      field.fill_col(r, w);
      if (r < cut.a) xhi = cut.b - 1;
      if (r >= cut.c) ylo = cut.d;
    }
    advance_line(lx.data(), w.data(), width, xlo, std::min(xhi, width), r == 0);
    advance_line(ly.data(), w.data(), width, ylo, std::min(yhi, width), r == 0);
  }

  auto finish = [](double v) { return v < kUnreachable ? 0.0 : v; };
  LppOutcome out;
  out.x_branch = finish(lx.back());
  out.y_branch = finish(ly.back());
  out.l2 = std::max(out.x_branch, out.y_branch);
  return out;
}

} // namespace detail

inline LppOutcome last_passage(const WeightField& field, const BranchCuts& cut = BranchCuts::standard()) {
  return detail::restricted_passage(field, cut);
}

inline BranchCuts cuts_for(const WeightSpec& spec) {
  if (const auto* t = std::get_if<Thick>(&spec)) return BranchCuts::thick(t->cols, t->rows);
  return BranchCuts::standard();
}

inline LppOutcome sample_last_passage(const GridShape& shape, const WeightSpec& spec, const StreamKey& key,
                                      FieldOptions opts = {}) {
  shape.validate();
  const WeightField field(shape, spec, key, std::move(opts));
  return last_passage(field, cuts_for(spec));
}

/// Unrestricted passage times L(i, j) for every site, stored at i + (N+1) j.
inline std::vector<double> last_passage_table(const WeightField& field) {
  const std::int64_t n = field.shape().n_cols, m = field.shape().n_rows;
  const auto stride = static_cast<std::size_t>(n + 1);
  std::vector<double> table(stride * static_cast<std::size_t>(m + 1));
  std::vector<double> w(stride);
  for (std::int64_t j = 0; j <= m; ++j) {
    field.fill_row(j, w);
    double* row = table.data() + stride * static_cast<std::size_t>(j);
    const double* below = j > 0 ? row - stride : nullptr;
    for (std::size_t i = 0; i < stride; ++i) {
      double best = 0.0;
      if (below && i > 0) best = std::max(below[i], row[i - 1]);
      else if (below) best = below[i];
      else if (i > 0) best = row[i - 1];
      row[i] = best + w[i];
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Brute-force oracle

inline LppOutcome brute_force_last_passage(const GridShape& shape, const ExplicitWeights& weights) {
  const std::int64_t n = shape.n_cols, m = shape.n_rows;
  detail::require(n >= 0 && m >= 0, "brute_force_last_passage: negative shape");
  detail::require(n + m <= 12, "brute_force_last_passage: N + M must not exceed 12");
  detail::require(weights.n_cols >= n && weights.n_rows >= m, "brute_force_last_passage: weight matrix too small");

  const double origin = weights(0, 0);
  if (n == 0 && m == 0) return {origin, origin, origin};

  // Each path is a bit string of N+M steps, bit set = step right.
  const int steps = static_cast<int>(n + m);
  double best_x = -1.0, best_y = -1.0;
  for (std::uint32_t mask = 0; mask < (1u << steps); ++mask) {
    if (std::popcount(mask) != static_cast<int>(n)) continue;
    std::int64_t i = 0, j = 0;
    double total = origin;
    for (int s = 0; s < steps; ++s) {
      if (mask >> s & 1u) ++i;
      else ++j;
      total += weights(i, j);
    }
    double& slot = (mask & 1u) ? best_x : best_y;
    slot = std::max(slot, total);
  }
  // An empty branch reports 0, as in the DP.
  LppOutcome out{0.0, std::max(best_x, 0.0), std::max(best_y, 0.0)};
  out.l2 = std::max(out.x_branch, out.y_branch);
  return out;
}

// ---------------------------------------------------------------------------
// Couplings

struct CoupledPair {
  LppOutcome original;
  LppOutcome tilded;
};

/// Same realization evaluated twice: once as sampled and once with each
/// boundary weight divided by its mean.
inline CoupledPair couple_divide_by_mean(const GridShape& shape, const TwoSided& spec, const StreamKey& key) {
  shape.validate();
  const WeightSpec ws = spec;
  const WeightField orig(shape, ws, key);
  const WeightField tilde(shape, ws, key, FieldOptions{true, {}});
  return {last_passage(orig), last_passage(tilde)};
}

enum class PinEdge { Bottom, Left };

/// Pin fractions used by the Gaussian-regime couplings.
inline double bottom_pin_fraction(double pi, const AspectRatio& g) {
  const double r = 1.0 / pi - 1.0;
  return 1.0 - g.gamma * g.gamma / (r * r);
}
inline double left_pin_fraction(double eta, const AspectRatio& g) {
  const double r = 1.0 / eta - 1.0;
  return 1.0 - 1.0 / (g.gamma * g.gamma) / (r * r);
}

/// Maximal weight of paths that follow the chosen edge to column
/// floor(f N) (resp. row floor(f M)) and are free afterwards.
inline double pinned_passage_time(const GridShape& shape, const WeightSpec& spec, const StreamKey& key, PinEdge edge,
                                  double pin_fraction) {
  shape.validate();
  detail::require(pin_fraction >= 0.0 && pin_fraction <= 1.0, "pin_fraction must lie in [0, 1]");
  const WeightField field(shape, spec, key);
  BranchCuts cut = BranchCuts::standard();
  if (edge == PinEdge::Bottom) {
    cut.a = std::max<std::int64_t>(static_cast<std::int64_t>(std::floor(pin_fraction * static_cast<double>(shape.n_cols))), 1);
    return last_passage(field, cut).x_branch;
  }
  cut.d = std::max<std::int64_t>(static_cast<std::int64_t>(std::floor(pin_fraction * static_cast<double>(shape.n_rows))), 1);
  return last_passage(field, cut).y_branch;
}

inline LppOutcome thick_boundary_sample(const GridShape& shape, const Thick& spec, const StreamKey& key) {
  return sample_last_passage(shape, WeightSpec{spec}, key);
}

} // namespace fluctlab
