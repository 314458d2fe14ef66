#pragma once

// Tracy-Widom distribution functions as Fredholm determinants, evaluated
// by Nystrom discretisation with Gauss-Legendre nodes, and tabulated
// reference CDFs with monotone cubic interpolation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
// pchip.hpp in older Boost uses an unqualified isnan.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/special_functions/airy.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "fluctlab/dist.hpp"
#include "fluctlab/error.hpp"
#include "fluctlab/theory.hpp"

namespace fluctlab {

inline constexpr int kDefaultQuadratureOrder = 96;

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` nodes mapped to [a, b].
inline QuadratureRule gauss_legendre(int order, double a, double b) {
  detail::require(order >= 2, "gauss_legendre: order must be at least 2");
  const auto pos = boost::math::legendre_p_zeros<double>(order);
  std::vector<double> t, w;
  for (double z : pos) {
    const double dp = boost::math::legendre_p_prime<double>(order, z);
    const double wt = 2.0 / ((1.0 - z * z) * dp * dp);
    if (z == 0.0) {
      t.push_back(0.0);
      w.push_back(wt);
    } else {
      t.push_back(z);
      w.push_back(wt);
      t.push_back(-z);
      w.push_back(wt);
    }
  }
  QuadratureRule out;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (std::size_t k = 0; k < t.size(); ++k) {
    out.nodes.push_back(mid + half * t[k]);
    out.weights.push_back(half * w[k]);
  }
  return out;
}

namespace detail {

template <class Kernel>
double fredholm_det(const QuadratureRule& q, Kernel&& k) {
  const auto m = static_cast<Eigen::Index>(q.nodes.size());
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double wi = std::sqrt(q.weights[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double wj = std::sqrt(q.weights[static_cast<std::size_t>(j)]);
      a(i, j) = (i == j ? 1.0 : 0.0) - wi * k(i, j) * wj;
    }
  }
  return a.partialPivLu().determinant();
}

inline double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

} // namespace detail

/// F_GUE(s) = det(I - K_Airy) on L^2(s, infinity).
inline double tw_gue_cdf(double s, int order = kDefaultQuadratureOrder) {
  const QuadratureRule q = gauss_legendre(order, s, std::max(s, 0.0) + 12.0);
  const std::size_t m = q.nodes.size();
  std::vector<double> ai(m), aip(m);
  for (std::size_t i = 0; i < m; ++i) {
    ai[i] = boost::math::airy_ai(q.nodes[i]);
    aip[i] = boost::math::airy_ai_prime(q.nodes[i]);
  }
  const double det = detail::fredholm_det(q, [&](Eigen::Index ii, Eigen::Index jj) {
    const auto i = static_cast<std::size_t>(ii), j = static_cast<std::size_t>(jj);
    if (i == j) return aip[i] * aip[i] - q.nodes[i] * ai[i] * ai[i];
    return (ai[i] * aip[j] - aip[i] * ai[j]) / (q.nodes[i] - q.nodes[j]);
  });
  return detail::clamp_unit(det);
}

/// Tracy-Widom GOE distribution F_GOE(s) = det(I - B_s) on L^2(0, infinity)
/// with B_s(x, y) = Ai(x + y + s); here in the variables u = 2x, v = 2y.
inline double tw_goe_cdf(double s, int order = kDefaultQuadratureOrder) {
  const QuadratureRule q = gauss_legendre(order, 0.0, 2.0 * std::max(12.0 - s, 4.0));
  const std::size_t m = q.nodes.size();
  Eigen::MatrixXd k(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      const double v = 0.5 * boost::math::airy_ai(0.5 * (q.nodes[i] + q.nodes[j]) + s);
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      k(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  return detail::clamp_unit(detail::fredholm_det(q, [&](Eigen::Index i, Eigen::Index j) { return k(i, j); }));
}

enum class TwBeta { GUE, GOE };

inline double tw_cdf(TwBeta beta, double x, int order = kDefaultQuadratureOrder) {
  return beta == TwBeta::GUE ? tw_gue_cdf(x, order) : tw_goe_cdf(x, order);
}

// ---------------------------------------------------------------------------
// Tables

/// Table families: F0 (GUE), FGOE (Tracy-Widom GOE itself), F1 (its
/// square), G1, G1_PRODUCT with factors a and b.
struct TableFamily {
  std::string name = "F0";
  double factor_a = 1.0;
  double factor_b = 1.0;

  static std::optional<TableFamily> parse(const std::string& s) {
    if (s == "F0" || s == "GUE") return TableFamily{"F0"};
    if (s == "FGOE" || s == "GOE") return TableFamily{"FGOE"};
    if (s == "F1" || s == "GOE2") return TableFamily{"F1"};
    if (s == "G1") return TableFamily{"G1"};
    if (s.rfind("G1_PRODUCT", 0) == 0) {
      TableFamily f{"G1_PRODUCT"};
      const auto colon = s.find(':');
      if (colon != std::string::npos) {
        try {
          f.factor_a = std::stod(s.substr(colon + 1));
        } catch (const std::exception&) {
          return std::nullopt;
        }
        if (!(f.factor_a > 0.0)) return std::nullopt;
        f.factor_b = 1.0 / f.factor_a;
      }
      return f;
    }
    return std::nullopt;
  }

  std::string label() const {
    if (name != "G1_PRODUCT") return name;
    std::ostringstream os;
    os.precision(17);
    os << name << ':' << factor_a;
    return os.str();
  }
};

class CdfTable {
public:
  static constexpr double kXMin = -10.0;
  static constexpr double kXMax = 6.0;
  static constexpr int kPoints = 801;

  CdfTable(TableFamily family, int order, std::vector<double> x, std::vector<double> f)
      : family_(std::move(family)), order_(order), x_(std::move(x)), f_(std::move(f)) {
    detail::require(x_.size() == f_.size() && x_.size() >= 4, "CdfTable: need at least four points");
    for (std::size_t i = 1; i < x_.size(); ++i) detail::require(x_[i] > x_[i - 1], "CdfTable: grid must increase");
    for (double& v : f_) v = detail::clamp_unit(v);
    for (std::size_t i = 1; i < f_.size(); ++i) f_[i] = std::max(f_[i], f_[i - 1]);
    auto xs = x_;
    auto fs = f_;
    interp_.emplace(std::move(xs), std::move(fs));
  }

  const TableFamily& family() const { return family_; }
  int order() const { return order_; }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& f() const { return f_; }
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

  /// Interpolated value; arguments outside the grid are clamped and flagged.
  double operator()(double x, bool* clamped = nullptr) const {
    if (clamped) *clamped = x < x_min() || x > x_max();
    if (x <= x_min()) return f_.front();
    if (x >= x_max()) return f_.back();
    return detail::clamp_unit((*interp_)(x));
  }

  /// Mean and variance of the tabulated law by integrating the CDF.
  std::pair<double, double> moments() const {
    double int_f = 0.0, int_xf = 0.0, int_1mf = 0.0, int_x1mf = 0.0;
    for (std::size_t i = 1; i < x_.size(); ++i) {
      const double h = x_[i] - x_[i - 1];
      const double a = x_[i - 1], b = x_[i];
      const double fa = f_[i - 1], fb = f_[i];
      if (b <= 0.0) {
        int_f += 0.5 * h * (fa + fb);
        int_xf += 0.5 * h * (a * fa + b * fb);
      } else {
        int_1mf += 0.5 * h * ((1 - fa) + (1 - fb));
        int_x1mf += 0.5 * h * (a * (1 - fa) + b * (1 - fb));
      }
    }
    // E X = int_0^inf (1-F) - int_-inf^0 F ;  E X^2 = 2 int_0 x (1-F) - 2 int^0 x F.
    const double mean = int_1mf - int_f;
    const double second = 2.0 * int_x1mf - 2.0 * int_xf;
    return {mean, second - mean * mean};
  }

  void write(std::ostream& os) const {
    os << "# " << family_.label() << ' ' << order_ << ' ' << fmt(x_min()) << ' ' << fmt(x_max()) << ' ' << x_.size()
       << '\n';
    for (std::size_t i = 0; i < x_.size(); ++i) os << fmt(x_[i]) << '\t' << fmt(f_[i]) << '\n';
  }

  static CdfTable read(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw Error("CdfTable::read: missing header");
    std::istringstream hs(line.substr(2));
    std::string fam;
    int order = 0;
    double lo = 0, hi = 0;
    std::size_t n = 0;
    if (!(hs >> fam >> order >> lo >> hi >> n)) throw Error("CdfTable::read: malformed header");
    auto family = TableFamily::parse(fam);
    if (!family) throw Error("CdfTable::read: unknown family " + fam);
    std::vector<double> x, f;
    x.reserve(n);
    f.reserve(n);
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      double a, b;
      if (!(ls >> a >> b)) throw Error("CdfTable::read: malformed row");
      x.push_back(a);
      f.push_back(b);
    }
    if (x.size() != n) throw Error("CdfTable::read: row count does not match header");
    return CdfTable(*family, order, std::move(x), std::move(f));
  }

  static std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

private:
  TableFamily family_;
  int order_;
  std::vector<double> x_, f_;
  std::optional<boost::math::interpolators::pchip<std::vector<double>>> interp_;
};

inline std::vector<double> standard_grid() {
  std::vector<double> x(CdfTable::kPoints);
  const double h = (CdfTable::kXMax - CdfTable::kXMin) / (CdfTable::kPoints - 1);
  for (int i = 0; i < CdfTable::kPoints; ++i) x[static_cast<std::size_t>(i)] = CdfTable::kXMin + h * i;
  return x;
}

inline CdfTable build_table(const TableFamily& family, int order = kDefaultQuadratureOrder) {
  const auto x = standard_grid();
  std::vector<double> f(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = x[i];
    if (family.name == "F0") f[i] = tw_gue_cdf(s, order);
    else if (family.name == "FGOE") f[i] = tw_goe_cdf(s, order);
    else if (family.name == "F1") f[i] = std::pow(tw_goe_cdf(s, order), 2);
    else if (family.name == "G1") f[i] = gaussian_cdf(s);
    else if (family.name == "G1_PRODUCT") f[i] = gaussian_product_cdf(s, family.factor_a, family.factor_b);
    else throw InvalidArgument("build_table: unknown family " + family.name);
  }
  return CdfTable(family, order, x, std::move(f));
}

/// Directory for cached tables: $FLUCTLAB_TABLE_DIR, else
/// $XDG_CACHE_HOME/fluctlab, else ~/.cache/fluctlab.
inline std::filesystem::path table_cache_dir() {
  if (const char* d = std::getenv("FLUCTLAB_TABLE_DIR"); d && *d) return d;
  if (const char* d = std::getenv("XDG_CACHE_HOME"); d && *d) return std::filesystem::path(d) / "fluctlab";
  if (const char* d = std::getenv("HOME"); d && *d) return std::filesystem::path(d) / ".cache" / "fluctlab";
  return std::filesystem::temp_directory_path() / "fluctlab";
}

inline std::filesystem::path table_cache_path(const TableFamily& family, int order) {
  std::string name = family.label();
  std::replace(name.begin(), name.end(), ':', '_');
  return table_cache_dir() / ("v1_" + name + "_" + std::to_string(order) + ".tab");
}

/// Loads a table from the disk cache, building and storing it on a miss.
/// Tables are also kept in memory for the life of the process.
inline const CdfTable& reference_table(const TableFamily& family, int order = kDefaultQuadratureOrder) {
  static std::mutex mu;
  static std::map<std::string, CdfTable> memo;
  const std::string key = family.label() + "/" + std::to_string(order);
  std::lock_guard lock(mu);
  if (auto it = memo.find(key); it != memo.end()) return it->second;

  const auto path = table_cache_path(family, order);
  std::optional<CdfTable> table;
  if (std::ifstream in(path); in) {
    try {
      table = CdfTable::read(in);
    } catch (const Error&) {
      table.reset();
    }
  }
  if (!table) {
    table = build_table(family, order);
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    const auto tmp = path.string() + ".tmp" + std::to_string(reinterpret_cast<std::uintptr_t>(&*table));
    if (std::ofstream out(tmp); out) {
      table->write(out);
      out.close();
      std::filesystem::rename(tmp, path, ec);
    }
  }
  return memo.emplace(key, std::move(*table)).first->second;
}

/// Distribution function of a limit law.  F11 has no evaluable form.
inline std::function<double(double)> law_cdf(const LimitLaw& law, int order = kDefaultQuadratureOrder) {
  switch (law.tag) {
  case LawTag::G1: return [](double x) { return gaussian_cdf(x); };
  case LawTag::G1_PRODUCT: {
    const double a = law.factor_a, b = law.factor_b;
    return [a, b](double x) { return gaussian_product_cdf(x, a, b); };
  }
  case LawTag::F0: {
    const CdfTable* t = &reference_table(TableFamily{"F0"}, order);
    return [t](double x) { return (*t)(x); };
  }
  case LawTag::F1: {
    const CdfTable* t = &reference_table(TableFamily{"F1"}, order);
    return [t](double x) { return (*t)(x); };
  }
  case LawTag::F11: break;
  }
  throw InvalidArgument("law_cdf: F11 has no numerical distribution function");
}

} // namespace fluctlab
