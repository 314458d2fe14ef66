#pragma once

// Dictionary between two-sided TASEP height events and last passage times
// with geometrically padded boundaries:
//
//   P(h_t(N - M) >= N + M) = P(L~(N, M) <= t).

#include <cmath>
#include <cstdint>
#include <vector>

#include "fluctlab/ensemble.hpp"
#include "fluctlab/error.hpp"
#include "fluctlab/lpp.hpp"
#include "fluctlab/rng.hpp"
#include "fluctlab/tasep.hpp"
#include "fluctlab/theory.hpp"

namespace fluctlab {

inline BoundaryParams tasep_to_lpp_params(const TasepParams& tp) {
  tp.validate();
  detail::require(tp.rho_plus > 0.0 && tp.rho_plus < 1.0 && tp.rho_minus > 0.0 && tp.rho_minus < 1.0,
                  "tasep_to_lpp_params: densities 0 and 1 map to one-sided or zero boundaries, not to (pi, eta)");
  return {1.0 - tp.rho_plus, tp.rho_minus};
}

/// Boundary of L~: the bottom row is zero through column zeta_plus and
/// Exp(1 - rho_plus) afterwards; the left column is zero through row
/// zeta_minus and Exp(rho_minus) afterwards.
struct PaddedBoundarySpec {
  double rho_minus = 0.5;
  double rho_plus = 0.5;

  void validate() const {
    detail::require(rho_minus >= 0.0 && rho_minus <= 1.0 && rho_plus >= 0.0 && rho_plus <= 1.0,
                    "padded boundary densities must lie in [0, 1]");
  }
};

struct PaddingRuns {
  std::int64_t zeta_plus = 0;
  std::int64_t zeta_minus = 0;
};

inline constexpr std::int64_t kUnboundedRun = std::int64_t{1} << 60;

namespace detail {
inline std::int64_t geometric_run(double u, double success) {
  if (success <= 0.0) return kUnboundedRun;
  const auto n = geometric_from_unit(u, success);
  return n > static_cast<std::uint64_t>(kUnboundedRun) ? kUnboundedRun : static_cast<std::int64_t>(n);
}
} // namespace detail

/// P(zeta_plus = n) = rho_plus (1 - rho_plus)^n and
/// P(zeta_minus = n) = (1 - rho_minus) rho_minus^n, drawn from the padding
/// sub-stream so the lattice weights are shared with the unpadded model.
inline PaddingRuns sample_padding(const PaddedBoundarySpec& spec, const StreamKey& key) {
  spec.validate();
  const CounterRng rng(key);
  const auto u = rng.pair(Stream::Padding, 0, 0);
  return {detail::geometric_run(u[0], spec.rho_plus), detail::geometric_run(u[1], 1.0 - spec.rho_minus)};
}

inline RateLayout padded_layout(const PaddedBoundarySpec& spec, const PaddingRuns& runs) {
  RateLayout out;
  out.row_rate = {1.0 - spec.rho_plus};
  out.col_rate = {spec.rho_minus};
  out.row0_zero_through = runs.zeta_plus;
  out.col0_zero_through = runs.zeta_minus;
  return out;
}

inline WeightField padded_field(const GridShape& shape, const PaddedBoundarySpec& spec, const StreamKey& key) {
  return WeightField(shape, padded_layout(spec, sample_padding(spec, key)), key);
}

/// L~(N, M) for one replica.
inline double sample_padded_lpp(const GridShape& shape, const PaddedBoundarySpec& spec, const StreamKey& key) {
  shape.validate();
  return last_passage(padded_field(shape, spec, key)).l2;
}

inline GridShape grid_from_height_event(std::int64_t j, std::int64_t level) {
  if (((level + j) % 2 + 2) % 2 != 0) throw ParityError("grid_from_height_event: level + j must be even");
  if (level <= std::abs(j)) throw ParityError("grid_from_height_event: level must exceed |j|");
  return {(level + j) / 2, (level - j) / 2};
}

struct CorrespondenceQuery {
  std::int64_t j = 0;
  std::int64_t level = 2;
  double t = 1.0;

  static CorrespondenceQuery from_grid(const GridShape& g, double t) {
    return {g.n_cols - g.n_rows, g.n_cols + g.n_rows, t};
  }
};

struct Proportion {
  double p = 0.0;
  double se = 0.0;
  std::uint64_t n = 0;

  static Proportion from_counts(std::uint64_t hits, std::uint64_t n) {
    Proportion out;
    out.n = n;
    if (n == 0) return out;
    out.p = static_cast<double>(hits) / static_cast<double>(n);
    out.se = std::sqrt(out.p * (1.0 - out.p) / static_cast<double>(n));
    return out;
  }
};

struct CorrespondenceResult {
  Proportion height;
  Proportion lpp;

  double combined_se() const { return std::sqrt(height.se * height.se + lpp.se * lpp.se); }
  double gap() const { return std::abs(height.p - lpp.p); }
};

/// h_t(j) of one replica for a range of sites; every event
/// {h_t(N - M) >= N + M} in a box is read off one run.
struct HeightEvents {
  std::int64_t j_lo = 0;
  std::vector<std::int64_t> heights;

  bool event(std::int64_t j, std::int64_t level) const {
    return heights.at(static_cast<std::size_t>(j - j_lo)) >= level;
  }
};

/// Runs one TASEP replica to time t and records h_t(j) for |j| <= j_max.
inline HeightEvents tasep_height_events(const TasepParams& tp, double t, std::int64_t j_max, const StreamKey& key,
                                        double margin = 20.0) {
  LatticeWindow w = window_for(tp, t, margin);
  w.lo = std::min(w.lo, -j_max - static_cast<std::int64_t>(margin));
  w.hi = std::max(w.hi, j_max + static_cast<std::int64_t>(margin));
  TasepState s = init_two_sided(tp, w, key);
  s.watch_heights(-j_max, j_max);
  s.step_to_time(t);
  return {-j_max, s.height_at(-j_max, j_max).values};
}

/// LPP side for every (N, M) in the box from one padded realization.
inline std::vector<double> padded_passage_table(const GridShape& box, const PaddedBoundarySpec& spec,
                                                const StreamKey& key) {
  return last_passage_table(padded_field(box, spec, key));
}

/// Both sides of the correspondence by independent ensembles.  Replica r of
/// the TASEP side uses (seed, r); the LPP side uses (seed + 1, r).
inline CorrespondenceResult check_correspondence(const TasepParams& tp, const CorrespondenceQuery& q,
                                                 std::uint64_t replicas, std::uint64_t seed) {
  tp.validate();
  const GridShape g = grid_from_height_event(q.j, q.level);
  detail::require(replicas >= 1, "check_correspondence: replicas must be positive");
  detail::require(q.t >= 0.0, "check_correspondence: t must be nonnegative");

  std::uint64_t h_hits = 0, l_hits = 0;
  for (std::uint64_t r = 0; r < replicas; ++r) {
    const LatticeWindow w = window_for(tp, q.t, 20.0 + static_cast<double>(std::abs(q.j)));
    if (sample_height(tp, w, {seed, r}, q.t, q.j) >= q.level) ++h_hits;
    const PaddedBoundarySpec ps{tp.rho_minus, tp.rho_plus};
    if (sample_padded_lpp(g, ps, {seed + 1, r}) <= q.t) ++l_hits;
  }
  return {Proportion::from_counts(h_hits, replicas), Proportion::from_counts(l_hits, replicas)};
}

struct GridCorrespondence {
  GridShape shape;
  CorrespondenceResult result;

  bool within(double n_se) const { return result.gap() <= n_se * result.combined_se(); }
};

/// Both sides for every (N, M) with N, M >= 1 and N + M <= max_sum.  Each
/// TASEP replica yields all height events at once, each padded LPP replica
/// its whole passage-time table.  Replica r of the TASEP side uses
/// (seed, r); the LPP side uses (seed + 1, r).
inline std::vector<GridCorrespondence> correspondence_grid(const TasepParams& tp, double t, std::int64_t max_sum,
                                                           std::uint64_t replicas, std::uint64_t seed,
                                                           unsigned threads = default_thread_count()) {
  tp.validate();
  detail::require(max_sum >= 2, "correspondence_grid: max_sum must be at least 2");
  detail::require(replicas >= 1, "correspondence_grid: replicas must be positive");
  detail::require(t >= 0.0, "correspondence_grid: t must be nonnegative");

  std::vector<GridShape> shapes;
  for (std::int64_t n = 1; n < max_sum; ++n)
    for (std::int64_t m = 1; n + m <= max_sum; ++m) shapes.push_back({n, m});
  const std::int64_t j_max = max_sum - 2;
  const GridShape box{max_sum - 1, max_sum - 1};
  const PaddedBoundarySpec ps{tp.rho_minus, tp.rho_plus};

  auto height_hits = run_replicas(
      replicas,
      [&](std::uint64_t r) {
        const HeightEvents ev = tasep_height_events(tp, t, j_max, {seed, r});
        std::vector<std::uint8_t> hit(shapes.size());
        for (std::size_t k = 0; k < shapes.size(); ++k)
          hit[k] = ev.event(shapes[k].n_cols - shapes[k].n_rows, shapes[k].n_cols + shapes[k].n_rows);
        return hit;
      },
      threads);
  auto lpp_hits = run_replicas(
      replicas,
      [&](std::uint64_t r) {
        const auto table = padded_passage_table(box, ps, {seed + 1, r});
        std::vector<std::uint8_t> hit(shapes.size());
        for (std::size_t k = 0; k < shapes.size(); ++k)
          hit[k] = table[static_cast<std::size_t>(shapes[k].n_cols + (box.n_cols + 1) * shapes[k].n_rows)] <= t;
        return hit;
      },
      threads);

  std::vector<GridCorrespondence> out;
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    std::uint64_t h = 0, l = 0;
    for (std::uint64_t r = 0; r < replicas; ++r) {
      h += height_hits[r][k];
      l += lpp_hits[r][k];
    }
    out.push_back({shapes[k], {Proportion::from_counts(h, replicas), Proportion::from_counts(l, replicas)}});
  }
  return out;
}

} // namespace fluctlab
