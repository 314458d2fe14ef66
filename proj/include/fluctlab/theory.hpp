#pragma once

// Deterministic fluctuation theory for two-sided TASEP and for last
// passage percolation with two-sided boundary rates: regime
// classification, centering/scaling constants, hydrodynamic limits and the
// change of variables between a TASEP observation and an LPP grid point.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "fluctlab/error.hpp"

namespace fluctlab {

/// Absolute tolerance used for every regime-boundary equality.
inline constexpr double kBoundaryTolerance = 1e-9;

/// Exponential rates of the bottom row (pi) and left column (eta).
struct BoundaryParams {
  double pi = 1.0;
  double eta = 1.0;

  void validate() const {
    detail::require(pi > 0.0 && pi <= 1.0, "pi must lie in (0, 1]");
    detail::require(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
  }
};

/// gamma = lim sqrt(M / N).
struct AspectRatio {
  double gamma = 1.0;

  void validate() const {
    detail::require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive and finite");
  }
};

/// N columns, M rows.
struct GridShape {
  std::int64_t n_cols = 1;
  std::int64_t n_rows = 1;

  void validate() const {
    detail::require(n_cols >= 1 && n_rows >= 1, "grid shape needs N >= 1 and M >= 1");
  }
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

struct TasepParams {
  double rho_minus = 0.5;
  double rho_plus = 0.5;

  void validate() const {
    detail::require(rho_minus >= 0.0 && rho_minus <= 1.0, "rho_minus must lie in [0, 1]");
    detail::require(rho_plus >= 0.0 && rho_plus <= 1.0, "rho_plus must lie in [0, 1]");
  }
};

struct Observation {
  double y = 0.0;
  double t = 1.0;

  void validate() const {
    detail::require(std::abs(y) < 1.0, "observer speed must satisfy |y| < 1");
    detail::require(t > 0.0, "time must be positive");
  }
};

enum class RegimeTag { GUE, GOE2_PI, GOE2_ETA, CRITICAL_F11, GAUSS_PI, GAUSS_ETA, G_SQUARED };

struct Regime {
  RegimeTag tag = RegimeTag::GUE;
  /// True when (pi, eta, gamma) lies within the tolerance band of a boundary curve.
  bool near_boundary = false;
};

enum class LawTag { F0, F1, F11, G1, G1_PRODUCT };

/// Limit distribution.  G1_PRODUCT has CDF x -> G1(a x) G1(b x).
struct LimitLaw {
  LawTag tag = LawTag::F0;
  double factor_a = 1.0;
  double factor_b = 1.0;

  static LimitLaw product(double c) { return {LawTag::G1_PRODUCT, c, 1.0 / c}; }
};

/// Which size variable a scaling law is expressed in.
enum class ScaleAxis { Columns, Rows, Time };

/// center(s) = center_rate * s,  scale(s) = scale_coef * s^exponent, with s
/// the size along `axis`.
struct ScalingLaw {
  ScaleAxis axis = ScaleAxis::Rows;
  double center_rate = 0.0;
  double scale_coef = 1.0;
  double exponent = 1.0 / 3.0;
  LimitLaw law{};

  double center_at(double size) const { return center_rate * size; }
  double scale_at(double size) const { return scale_coef * std::pow(size, exponent); }

  double size_of(const GridShape& g) const {
    return axis == ScaleAxis::Columns ? static_cast<double>(g.n_cols) : static_cast<double>(g.n_rows);
  }
  double center(const GridShape& g) const { return center_at(size_of(g)); }
  double scale(const GridShape& g) const { return scale_at(size_of(g)); }
  double rescale(double raw, const GridShape& g) const { return (raw - center(g)) / scale(g); }
};

inline std::string_view to_string(RegimeTag t) {
  switch (t) {
  case RegimeTag::GUE: return "GUE";
  case RegimeTag::GOE2_PI: return "GOE2_PI";
  case RegimeTag::GOE2_ETA: return "GOE2_ETA";
  case RegimeTag::CRITICAL_F11: return "CRITICAL_F11";
  case RegimeTag::GAUSS_PI: return "GAUSS_PI";
  case RegimeTag::GAUSS_ETA: return "GAUSS_ETA";
  case RegimeTag::G_SQUARED: return "G_SQUARED";
  }
  return "?";
}

inline std::string_view to_string(LawTag t) {
  switch (t) {
  case LawTag::F0: return "F0";
  case LawTag::F1: return "F1";
  case LawTag::F11: return "F11";
  case LawTag::G1: return "G1";
  case LawTag::G1_PRODUCT: return "G1_PRODUCT";
  }
  return "?";
}

inline std::optional<LawTag> law_from_string(std::string_view s) {
  if (s == "F0" || s == "GUE") return LawTag::F0;
  if (s == "F1" || s == "GOE2") return LawTag::F1;
  if (s == "F11") return LawTag::F11;
  if (s == "G1") return LawTag::G1;
  if (s == "G1_PRODUCT" || s == "G2") return LawTag::G1_PRODUCT;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// LPP regimes

inline double critical_pi(const AspectRatio& g) { return 1.0 / (1.0 + g.gamma); }
inline double critical_eta(const AspectRatio& g) { return g.gamma / (1.0 + g.gamma); }

namespace detail {
inline double g2_curve_formula(double pi, double gamma) {
  const double ig2 = 1.0 / (gamma * gamma);
  return pi / (pi * (1.0 - ig2) + ig2);
}
} // namespace detail

/// eta on the line where the leading orders of the two branches coincide.
inline double g2_curve_eta(double pi, const AspectRatio& g) {
  g.validate();
  detail::require(pi > 0.0 && pi <= critical_pi(g) + kBoundaryTolerance,
                  "g2_curve_eta: pi must lie in (0, 1/(1+gamma)]");
  return detail::g2_curve_formula(pi, g.gamma);
}

inline Regime classify_lpp_regime(const BoundaryParams& p, const AspectRatio& g) {
  p.validate();
  g.validate();
  constexpr double tol = kBoundaryTolerance;
  const double dpi = p.pi - critical_pi(g);
  const double deta = p.eta - critical_eta(g);
  const double dg2 = p.eta - detail::g2_curve_formula(p.pi, g.gamma);
  const bool flagged = std::abs(dpi) <= tol || std::abs(deta) <= tol || (dpi < 0 && std::abs(dg2) <= tol);

  RegimeTag tag;
  if (std::abs(dpi) <= tol && std::abs(deta) <= tol) {
    tag = RegimeTag::CRITICAL_F11;
  } else if (std::abs(dpi) <= tol && deta > tol) {
    tag = RegimeTag::GOE2_PI;
  } else if (std::abs(deta) <= tol && dpi > tol) {
    tag = RegimeTag::GOE2_ETA;
  } else if (dpi > tol && deta > tol) {
    tag = RegimeTag::GUE;
  } else if (dpi < -tol) {
    // Below the critical pi the G^2 curve lies below the critical eta, so
    // pi + eta < 1 holds automatically on it.
    if (std::abs(dg2) <= tol) tag = RegimeTag::G_SQUARED;
    else if (dg2 > 0) tag = RegimeTag::GAUSS_PI;
    else tag = RegimeTag::GAUSS_ETA;
  } else {
    tag = RegimeTag::GAUSS_ETA;
  }
  return {tag, flagged};
}

inline ScalingLaw lpp_scaling_law(const BoundaryParams& p, const AspectRatio& g) {
  const Regime r = classify_lpp_regime(p, g);
  const double gm = g.gamma;
  const double g2 = gm * gm;

  auto one_third = [&](LawTag law) {
    return ScalingLaw{ScaleAxis::Rows, std::pow(1.0 + 1.0 / gm, 2), std::pow(1.0 + gm, 4.0 / 3.0) / gm,
                      1.0 / 3.0, LimitLaw{law}};
  };
  auto pi_center = [&](double pi) {
    const double ip = 1.0 / pi;
    return ip + ip * g2 / (ip - 1.0);
  };

  switch (r.tag) {
  case RegimeTag::GUE: return one_third(LawTag::F0);
  case RegimeTag::GOE2_PI:
  case RegimeTag::GOE2_ETA: return one_third(LawTag::F1);
  case RegimeTag::CRITICAL_F11: return one_third(LawTag::F11);
  case RegimeTag::GAUSS_PI: {
    const double ip = 1.0 / p.pi;
    const double var = ip * ip - ip * ip * g2 / ((ip - 1.0) * (ip - 1.0));
    return {ScaleAxis::Columns, pi_center(p.pi), std::sqrt(var), 0.5, LimitLaw{LawTag::G1}};
  }
  case RegimeTag::GAUSS_ETA: {
    const double ie = 1.0 / p.eta;
    const double center = ie + ie / g2 / (ie - 1.0);
    const double var = ie * ie - ie * ie / g2 / ((ie - 1.0) * (ie - 1.0));
    return {ScaleAxis::Rows, center, std::sqrt(var), 0.5, LimitLaw{LawTag::G1}};
  }
  case RegimeTag::G_SQUARED: {
    const double pi = p.pi;
    const double q = 1.0 - pi;
    const double var = (q + pi * g2) * (q * q - pi * pi * g2) / (g2 * pi * pi * q * q);
    const double c = gm / std::sqrt(1.0 - pi + g2 * pi);
    return {ScaleAxis::Columns, pi_center(pi), std::sqrt(var), 0.5, LimitLaw::product(c)};
  }
  }
  return {};
}

/// Variance coefficient of the pi-controlled Gaussian regime; positive iff
/// pi < 1/(1+gamma), zero on the critical line.
inline double gauss_pi_variance(double pi, double gamma) {
  const double ip = 1.0 / pi;
  return ip * ip - ip * ip * gamma * gamma / ((ip - 1.0) * (ip - 1.0));
}

// ---------------------------------------------------------------------------
// TASEP hydrodynamics

inline double critical_speed(const TasepParams& tp) {
  tp.validate();
  if (tp.rho_minus > tp.rho_plus + kBoundaryTolerance)
    throw InvalidArgument("critical_speed: rho_minus > rho_plus has a rarefaction fan, not a single shock speed");
  return 1.0 - (tp.rho_minus + tp.rho_plus);
}

/// Limiting height profile h(y) = lim h_t([yt]) / t.
inline double hydro_height(double y, const TasepParams& tp) {
  tp.validate();
  detail::require(std::abs(y) < 1.0, "hydro_height: |y| < 1 required");
  const double rm = tp.rho_minus, rp = tp.rho_plus;
  auto left = [&] { return (1.0 - 2.0 * rm) * y + 2.0 * rm * (1.0 - rm); };
  auto right = [&] { return (1.0 - 2.0 * rp) * y + 2.0 * rp * (1.0 - rp); };
  if (rm <= rp) {
    return y <= 1.0 - (rm + rp) ? left() : right();
  }
  if (y <= 1.0 - 2.0 * rm) return left();
  if (y <= 1.0 - 2.0 * rp) return 0.5 * (y * y + 1.0);
  return right();
}

struct FerrariFontesRates {
  double mean_rate;
  double variance_rate;
};

/// Law of large numbers and CLT variance rate of the equilibrium current J_{yt,t}.
inline FerrariFontesRates ferrari_fontes(double rho, double y) {
  detail::require(rho > 0.0 && rho < 1.0, "ferrari_fontes: 0 < rho < 1 required");
  return {rho * (1.0 - rho) - y * rho, rho * (1.0 - rho) * std::abs((1.0 - 2.0 * rho) - y)};
}

// ---------------------------------------------------------------------------
// TASEP limit laws

enum class TasepCase {
  GAUSS_RIGHT,   ///< Gaussian, variance from the right density
  GAUSS_LEFT,    ///< Gaussian, variance from the left density
  G_SQUARED,     ///< on the shock
  GUE,           ///< inside the rarefaction fan
  GOE2_LEFT_EDGE,
  GOE2_RIGHT_EDGE,
  F11,           ///< equilibrium at the characteristic speed
  UNSUPPORTED,
};

inline std::string_view to_string(TasepCase c) {
  switch (c) {
  case TasepCase::GAUSS_RIGHT: return "GAUSS_RIGHT";
  case TasepCase::GAUSS_LEFT: return "GAUSS_LEFT";
  case TasepCase::G_SQUARED: return "G_SQUARED";
  case TasepCase::GUE: return "GUE";
  case TasepCase::GOE2_LEFT_EDGE: return "GOE2_LEFT_EDGE";
  case TasepCase::GOE2_RIGHT_EDGE: return "GOE2_RIGHT_EDGE";
  case TasepCase::F11: return "F11";
  case TasepCase::UNSUPPORTED: return "UNSUPPORTED";
  }
  return "?";
}

/// Limit law of (t h(y) - h_t([yt])) / scale.  `law` is empty for UNSUPPORTED.
struct TasepLaw {
  TasepCase tasep_case = TasepCase::UNSUPPORTED;
  std::optional<ScalingLaw> law;
};

inline TasepLaw tasep_limit_law(const TasepParams& tp, double y) {
  tp.validate();
  detail::require(std::abs(y) < 1.0, "tasep_limit_law: |y| < 1 required");
  constexpr double tol = kBoundaryTolerance;
  const double rm = tp.rho_minus, rp = tp.rho_plus;
  const double hbar = hydro_height(y, tp);

  auto kpz = [&](LawTag tag) {
    return ScalingLaw{ScaleAxis::Time, hbar, std::pow(2.0, -1.0 / 3.0) * std::pow(1.0 - y * y, 2.0 / 3.0),
                      1.0 / 3.0, LimitLaw{tag}};
  };
  auto gauss = [&](double var_rate) {
    return ScalingLaw{ScaleAxis::Time, hbar, std::sqrt(var_rate), 0.5, LimitLaw{LawTag::G1}};
  };
  // Gaussian cases are only reachable through the LPP mapping when the
  // observation point lies inside the growth quadrant.
  auto right_gauss = [&]() -> TasepLaw {
    if (!(y < 1.0 - rp - tol)) return {TasepCase::UNSUPPORTED, std::nullopt};
    return {TasepCase::GAUSS_RIGHT, gauss(4.0 * rp * (1.0 - rp) * (y - 1.0 + 2.0 * rp))};
  };
  auto left_gauss = [&]() -> TasepLaw {
    if (!(-rm < y - tol)) return {TasepCase::UNSUPPORTED, std::nullopt};
    return {TasepCase::GAUSS_LEFT, gauss(4.0 * rm * (1.0 - rm) * (-y + 1.0 - 2.0 * rm))};
  };

  if (std::abs(rm - rp) <= tol) {
    const double yc = 1.0 - 2.0 * rm;
    if (std::abs(y - yc) <= tol) return {TasepCase::F11, kpz(LawTag::F11)};
    return y > yc ? right_gauss() : left_gauss();
  }
  if (rm < rp) {
    const double yc = 1.0 - (rm + rp);
    if (std::abs(y - yc) <= tol) {
      ScalingLaw law{ScaleAxis::Time, hbar, std::sqrt(rp - rm), 0.5,
                     LimitLaw{LawTag::G1_PRODUCT, 1.0 / std::sqrt(4.0 * rp * (1.0 - rp)),
                              1.0 / std::sqrt(4.0 * rm * (1.0 - rm))}};
      return {TasepCase::G_SQUARED, law};
    }
    return y > yc ? right_gauss() : left_gauss();
  }
  const double lo = 1.0 - 2.0 * rm, hi = 1.0 - 2.0 * rp;
  if (std::abs(y - lo) <= tol) return {TasepCase::GOE2_LEFT_EDGE, kpz(LawTag::F1)};
  if (std::abs(y - hi) <= tol) return {TasepCase::GOE2_RIGHT_EDGE, kpz(LawTag::F1)};
  if (y > lo && y < hi) return {TasepCase::GUE, kpz(LawTag::F0)};
  return y > hi ? right_gauss() : left_gauss();
}

/// LPP regime that a TASEP case corresponds to under pi = 1 - rho_plus,
/// eta = rho_minus.
inline std::optional<RegimeTag> lpp_regime_for(TasepCase c) {
  switch (c) {
  case TasepCase::GAUSS_RIGHT: return RegimeTag::GAUSS_PI;
  case TasepCase::GAUSS_LEFT: return RegimeTag::GAUSS_ETA;
  case TasepCase::G_SQUARED: return RegimeTag::G_SQUARED;
  case TasepCase::GUE: return RegimeTag::GUE;
  case TasepCase::GOE2_LEFT_EDGE: return RegimeTag::GOE2_ETA;
  case TasepCase::GOE2_RIGHT_EDGE: return RegimeTag::GOE2_PI;
  case TasepCase::F11: return RegimeTag::CRITICAL_F11;
  case TasepCase::UNSUPPORTED: return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Change of variables between observer time and grid size

enum class InversionRoot { Half, Third };

inline double root_exponent(InversionRoot r) { return r == InversionRoot::Half ? 0.5 : 1.0 / 3.0; }

/// Asymptotic inverse of M = a t + b t^root.
inline double invert_time(double a, double b, InversionRoot root, double m) {
  detail::require(a > 0.0, "invert_time: a must be positive");
  detail::require(m > 0.0, "invert_time: M must be positive");
  if (root == InversionRoot::Half) return m / a - std::pow(a, -1.5) * b * std::sqrt(m);
  return m / a - std::pow(a, -4.0 / 3.0) * b * std::cbrt(m);
}

/// t(M) for rows growing as M = a t + b t^root.
struct TimeMap {
  double a = 1.0;
  double b = 0.0;
  InversionRoot root = InversionRoot::Third;

  double operator()(double m) const { return invert_time(a, b, root, m); }
};

struct GridObservation {
  GridShape shape;
  AspectRatio gamma;
  TimeMap time_of_rows;
  std::int64_t site = 0;          ///< j = floor(y t)
  std::int64_t level = 0;         ///< integer height threshold, level + j even
  bool parity_adjusted = false;   ///< level was raised by one to restore parity
  TasepLaw law;
};

/// The grid point (N, M) with P(h_t(j) >= level) = P(L(N, M) <= t), where
/// level is the height at which (t h(y) - h) / scale = x.
inline GridObservation observation_to_grid(const TasepParams& tp, const Observation& obs, double x) {
  tp.validate();
  obs.validate();
  TasepLaw tl = tasep_limit_law(tp, obs.y);
  if (!tl.law) throw InvalidArgument("observation_to_grid: observation has no supported limit law");
  const ScalingLaw& law = *tl.law;

  const double hbar = hydro_height(obs.y, tp);
  const auto j = static_cast<std::int64_t>(std::floor(obs.y * obs.t));
  const double real_level = obs.t * hbar - law.scale_at(obs.t) * x;
  auto level = static_cast<std::int64_t>(std::ceil(real_level - 1e-9));
  bool adjusted = false;
  if (((level + j) % 2 + 2) % 2 != 0) {
    ++level;
    adjusted = true;
  }
  const std::int64_t n = (level + j) / 2;
  const std::int64_t m = (level - j) / 2;
  if (n < 1 || m < 1) throw ParityError("observation_to_grid: grid point falls outside the quadrant");

  const double gamma2 = (hbar - obs.y) / (hbar + obs.y);
  detail::require(gamma2 > 0.0, "observation_to_grid: observation outside the LPP quadrant");

  const double a = 0.5 * (hbar - obs.y);
  const double b = -0.5 * law.scale_coef * x;
  const InversionRoot root = law.exponent > 0.4 ? InversionRoot::Half : InversionRoot::Third;

  GridObservation out;
  out.shape = {n, m};
  out.gamma = {std::sqrt(gamma2)};
  out.time_of_rows = {a, b, root};
  out.site = j;
  out.level = level;
  out.parity_adjusted = adjusted;
  out.law = std::move(tl);
  return out;
}

} // namespace fluctlab
