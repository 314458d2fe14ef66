// fluctlab command-line driver.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fluctlab/dist.hpp"
#include "fluctlab/ensemble.hpp"
#include "fluctlab/lpp.hpp"
#include "fluctlab/mapping.hpp"
#include "fluctlab/tasep.hpp"
#include "fluctlab/theory.hpp"
#include "fluctlab/tracy_widom.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fluctlab;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitInvalid = 2;
constexpr int kExitAborted = 3;

std::string fmt17(double v) { return CdfTable::fmt(v); }

std::string axis_name(ScaleAxis a) {
  switch (a) {
  case ScaleAxis::Columns: return "N";
  case ScaleAxis::Rows: return "M";
  case ScaleAxis::Time: return "t";
  }
  return "?";
}

json law_json(const ScalingLaw& s) {
  json j;
  j["axis"] = axis_name(s.axis);
  j["center_rate"] = s.center_rate;
  j["scale_coef"] = s.scale_coef;
  j["exponent"] = s.exponent;
  j["law"] = std::string(to_string(s.law.tag));
  if (s.law.tag == LawTag::G1_PRODUCT) {
    j["factor_a"] = s.law.factor_a;
    j["factor_b"] = s.law.factor_b;
  }
  return j;
}

std::string law_text(const ScalingLaw& s) {
  std::ostringstream os;
  os.precision(10);
  const std::string ax = axis_name(s.axis);
  const std::string power = s.exponent > 0.4 ? "^(1/2)" : "^(1/3)";
  os << "center=" << s.center_rate << "*" << ax << ", scale=" << s.scale_coef << "*" << ax << power
     << ", law=" << to_string(s.law.tag);
  if (s.law.tag == LawTag::G1_PRODUCT) os << "(" << s.law.factor_a << "," << s.law.factor_b << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyArgs {
  double pi = NAN, eta = NAN, gamma = 1.0;
  double rho_minus = NAN, rho_plus = NAN, y = NAN;
  long long n = 0, m = 0;
  double t = 0.0;
  std::string sweep, curves;
  int resolution = 200;
  bool as_json = false;
};

int cmd_classify(const ClassifyArgs& a) {
  if (!a.sweep.empty() || !a.curves.empty()) {
    const AspectRatio g{a.gamma};
    g.validate();
    if (!a.sweep.empty()) {
      detail::require(a.resolution >= 2, "--resolution must be at least 2");
      std::ofstream out(a.sweep);
      if (!out) throw Error("cannot write " + a.sweep);
      out << "gamma,pi,eta,regime,near_boundary,exponent,law\n";
      for (int i = 0; i < a.resolution; ++i)
        for (int k = 0; k < a.resolution; ++k) {
          const double pi = (i + 0.5) / a.resolution, eta = (k + 0.5) / a.resolution;
          const Regime r = classify_lpp_regime({pi, eta}, g);
          const ScalingLaw s = lpp_scaling_law({pi, eta}, g);
          out << fmt17(a.gamma) << ',' << fmt17(pi) << ',' << fmt17(eta) << ',' << to_string(r.tag) << ','
              << (r.near_boundary ? 1 : 0) << ',' << fmt17(s.exponent) << ',' << to_string(s.law.tag) << '\n';
        }
    }
    if (!a.curves.empty()) {
      std::ofstream out(a.curves);
      if (!out) throw Error("cannot write " + a.curves);
      out << "curve,gamma,pi,eta\n";
      const double pc = critical_pi(g), ec = critical_eta(g);
      const int n = a.resolution;
      for (int k = 0; k <= n; ++k) {
        const double eta = ec + (1.0 - ec) * k / n;
        out << "pi_critical," << fmt17(a.gamma) << ',' << fmt17(pc) << ',' << fmt17(eta) << '\n';
      }
      for (int k = 0; k <= n; ++k) {
        const double pi = pc + (1.0 - pc) * k / n;
        out << "eta_critical," << fmt17(a.gamma) << ',' << fmt17(pi) << ',' << fmt17(ec) << '\n';
      }
      for (int k = 1; k <= n; ++k) {
        const double pi = pc * k / n;
        out << "g2," << fmt17(a.gamma) << ',' << fmt17(pi) << ',' << fmt17(g2_curve_eta(pi, g)) << '\n';
      }
    }
    return 0;
  }

  const bool lpp = !std::isnan(a.pi) || !std::isnan(a.eta);
  const bool tasep = !std::isnan(a.rho_minus) || !std::isnan(a.rho_plus) || !std::isnan(a.y);
  detail::require(lpp != tasep, "give either --pi/--eta (LPP) or --rho-minus/--rho-plus/--y (TASEP)");

  json j;
  std::string line;
  if (lpp) {
    detail::require(!std::isnan(a.pi) && !std::isnan(a.eta), "--pi and --eta are both required");
    const BoundaryParams p{a.pi, a.eta};
    const AspectRatio g{a.gamma};
    const Regime r = classify_lpp_regime(p, g);
    const ScalingLaw s = lpp_scaling_law(p, g);
    j["model"] = "lpp";
    j["pi"] = a.pi;
    j["eta"] = a.eta;
    j["gamma"] = a.gamma;
    j["regime"] = std::string(to_string(r.tag));
    j["near_boundary"] = r.near_boundary;
    j["scaling"] = law_json(s);
    line = std::string(to_string(r.tag)) + ", " + law_text(s);
    if (a.n > 0 || a.m > 0) {
      const GridShape shape{a.n > 0 ? a.n : 1, a.m > 0 ? a.m : 1};
      j["center"] = s.center(shape);
      j["scale"] = s.scale(shape);
    }
  } else {
    detail::require(!std::isnan(a.rho_minus) && !std::isnan(a.rho_plus) && !std::isnan(a.y),
                    "--rho-minus, --rho-plus and --y are all required");
    const TasepParams tp{a.rho_minus, a.rho_plus};
    const TasepLaw tl = tasep_limit_law(tp, a.y);
    j["model"] = "tasep";
    j["rho_minus"] = a.rho_minus;
    j["rho_plus"] = a.rho_plus;
    j["y"] = a.y;
    j["case"] = std::string(to_string(tl.tasep_case));
    j["hydro_height"] = hydro_height(a.y, tp);
    if (tl.law) {
      j["scaling"] = law_json(*tl.law);
      line = std::string(to_string(tl.tasep_case)) + ", " + law_text(*tl.law);
      if (a.t > 0) {
        j["center"] = tl.law->center_at(a.t);
        j["scale"] = tl.law->scale_at(a.t);
      }
    } else {
      line = "UNSUPPORTED";
    }
  }
  if (a.as_json) std::cout << j.dump(2) << '\n';
  else std::cout << line << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimConfig {
  std::string model = "lpp";
  std::string boundary = "two-sided";
  double pi = 1.0, eta = 1.0, gamma = 1.0;
  long long n = 0, m = 0;
  double rho_minus = 0.5, rho_plus = 0.5, y = 0.0, t = 0.0, margin = 0.0;
  long long replicas = 0;
  unsigned long long seed = 0;
  std::string out;

  json to_json() const {
    json j;
    j["model"] = model;
    if (model == "lpp") {
      j["boundary"] = boundary;
      j["pi"] = pi;
      j["eta"] = eta;
    }
    if (model == "lpp" || model == "mapping") {
      j["N"] = n;
      j["M"] = m;
    }
    if (model == "tasep" || model == "mapping") {
      j["rho_minus"] = rho_minus;
      j["rho_plus"] = rho_plus;
    }
    if (model == "tasep") {
      j["y"] = y;
      j["t"] = t;
      j["margin"] = margin;
    }
    j["replicas"] = replicas;
    j["seed"] = seed;
    j["out"] = out;
    return j;
  }

  static SimConfig from_json(const json& j) {
    SimConfig c;
    c.model = j.at("model").get<std::string>();
    c.boundary = j.value("boundary", c.boundary);
    c.pi = j.value("pi", c.pi);
    c.eta = j.value("eta", c.eta);
    c.n = j.value("N", c.n);
    c.m = j.value("M", c.m);
    c.rho_minus = j.value("rho_minus", c.rho_minus);
    c.rho_plus = j.value("rho_plus", c.rho_plus);
    c.y = j.value("y", c.y);
    c.t = j.value("t", c.t);
    c.margin = j.value("margin", c.margin);
    c.replicas = j.at("replicas").get<long long>();
    c.seed = j.at("seed").get<unsigned long long>();
    c.out = j.value("out", c.out);
    return c;
  }
};

struct Replica {
  bool aborted = false;
  double raw = 0.0;
};

/// Everything a simulation run needs besides the replica loop.
struct Prepared {
  std::function<Replica(std::uint64_t)> sample;
  std::function<double(double)> rescale;
  json regime;
};

Prepared prepare(SimConfig& c) {
  detail::require(c.replicas >= 1, "--replicas must be at least 1");
  Prepared p;
  const std::uint64_t seed = c.seed;

  if (c.model == "lpp" || c.model == "mapping") {
    detail::require(c.n >= 1, "--N must be at least 1");
    if (c.m <= 0) c.m = std::llround(c.gamma * c.gamma * static_cast<double>(c.n));
    detail::require(c.m >= 1, "--M must be at least 1");
    const GridShape shape{c.n, c.m};
    const AspectRatio g{std::sqrt(static_cast<double>(c.m) / static_cast<double>(c.n))};

    BoundaryParams bp{1.0, 1.0};
    if (c.model == "lpp") {
      WeightSpec spec;
      if (c.boundary == "two-sided") {
        spec = TwoSided{c.pi, c.eta};
        bp = {c.pi, c.eta};
      } else if (c.boundary == "zero") {
        spec = ZeroBoundary{};
      } else {
        throw InvalidArgument("--boundary must be two-sided or zero");
      }
      layout_for(spec, shape);
      p.sample = [shape, spec, seed](std::uint64_t r) {
        return Replica{false, sample_last_passage(shape, spec, {seed, r}).l2};
      };
    } else {
      const PaddedBoundarySpec ps{c.rho_minus, c.rho_plus};
      ps.validate();
      bp = {std::clamp(1.0 - c.rho_plus, 0.0, 1.0), std::clamp(c.rho_minus, 0.0, 1.0)};
      p.sample = [shape, ps, seed](std::uint64_t r) { return Replica{false, sample_padded_lpp(shape, ps, {seed, r})}; };
    }
    if (bp.pi > 0.0 && bp.eta > 0.0) {
      const Regime r = classify_lpp_regime(bp, g);
      const ScalingLaw s = lpp_scaling_law(bp, g);
      p.regime["regime"] = std::string(to_string(r.tag));
      p.regime["gamma"] = g.gamma;
      p.regime["scaling"] = law_json(s);
      p.rescale = [s, shape](double raw) { return s.rescale(raw, shape); };
    } else {
      p.regime["regime"] = "NONE";
      p.rescale = [](double) { return NAN; };
    }
  } else if (c.model == "tasep") {
    const TasepParams tp{c.rho_minus, c.rho_plus};
    const Observation obs{c.y, c.t};
    tp.validate();
    obs.validate();
    detail::require(c.margin >= 0.0, "--margin must be nonnegative");
    const std::int64_t j = observer_site(c.y, c.t);
    const double slack = c.margin > 0.0 ? c.margin : 30.0 + 6.0 * std::sqrt(c.t + 1.0);
    LatticeWindow w = front_window(tp, c.t, slack);
    const auto pad = static_cast<std::int64_t>(std::ceil(slack));
    w.lo = std::min(w.lo, j - pad);
    w.hi = std::max(w.hi, j + pad);
    const double t = c.t;
    p.sample = [tp, w, t, j, seed](std::uint64_t r) {
      try {
        return Replica{false, static_cast<double>(sample_height(tp, w, {seed, r}, t, j))};
      } catch (const WindowBreach&) {
        return Replica{true, 0.0};
      }
    };
    const TasepLaw tl = tasep_limit_law(tp, c.y);
    p.regime["case"] = std::string(to_string(tl.tasep_case));
    p.regime["site"] = j;
    p.regime["window"] = {w.lo, w.hi};
    if (tl.law) {
      const ScalingLaw s = *tl.law;
      p.regime["scaling"] = law_json(s);
      p.rescale = [s, t](double raw) { return (s.center_at(t) - raw) / s.scale_at(t); };
    } else {
      p.rescale = [](double) { return NAN; };
    }
  } else {
    throw InvalidArgument("--model must be lpp, tasep or mapping");
  }
  return p;
}

struct SimArgs {
  SimConfig cfg;
  std::string manifest;
  std::string from_manifest;
  bool resume = false;
  double checkpoint_seconds = 30.0;
};

std::string manifest_path_for(const SimArgs& a) { return a.manifest.empty() ? a.cfg.out + ".manifest.json" : a.manifest; }

int cmd_simulate(SimArgs a) {
  const auto wall0 = std::chrono::steady_clock::now();
  json old_manifest;
  if (!a.from_manifest.empty()) {
    std::ifstream in(a.from_manifest);
    if (!in) throw InvalidArgument("cannot read manifest " + a.from_manifest);
    old_manifest = json::parse(in);
    const std::string out_override = a.cfg.out;
    a.cfg = SimConfig::from_json(old_manifest.at("config"));
    if (!out_override.empty()) a.cfg.out = out_override;
  }
  detail::require(!a.cfg.out.empty(), "--out is required");
  Prepared prep = prepare(a.cfg);
  const std::string mpath = manifest_path_for(a);

  std::uint64_t next = 0;
  std::vector<std::uint64_t> aborted;
  if (a.resume && fs::exists(mpath) && fs::exists(a.cfg.out)) {
    std::ifstream in(mpath);
    const json m = json::parse(in);
    if (SimConfig::from_json(m.at("config")).to_json() != a.cfg.to_json())
      throw InvalidArgument("--resume: configuration differs from the manifest");
    next = m.value("next_replica", std::uint64_t{0});
    aborted = m.value("aborted", std::vector<std::uint64_t>{});
    // Drop rows written after the last manifest update.
    std::ifstream csv(a.cfg.out);
    std::ostringstream keep;
    std::string line;
    std::getline(csv, line);
    keep << line << '\n';
    while (std::getline(csv, line))
      if (!line.empty() && std::stoull(line.substr(0, line.find(','))) < next) keep << line << '\n';
    csv.close();
    std::ofstream(a.cfg.out, std::ios::trunc) << keep.str();
  } else {
    std::ofstream out(a.cfg.out, std::ios::trunc);
    if (!out) throw Error("cannot write " + a.cfg.out);
    out << "replica,raw,rescaled\n";
  }

  const auto total = static_cast<std::uint64_t>(a.cfg.replicas);
  const unsigned threads = default_thread_count();
  const std::uint64_t chunk = std::max<std::uint64_t>(64, 16ull * threads);

  auto write_manifest = [&](bool complete) {
    json m;
    m["tool"] = "fluctlab";
    m["version"] = kVersion;
    m["config"] = a.cfg.to_json();
    m["theory"] = prep.regime;
    m["next_replica"] = next;
    m["aborted"] = aborted;
    m["complete"] = complete;
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    const std::string tmp = mpath + ".tmp";
    std::ofstream(tmp) << m.dump(2) << '\n';
    fs::rename(tmp, mpath);
  };

  std::ofstream out(a.cfg.out, std::ios::app);
  std::string pending;
  auto last_flush = std::chrono::steady_clock::now();
  while (next < total) {
    const std::uint64_t count = std::min(chunk, total - next);
    const auto reps = run_replicas(next, count, prep.sample, threads);
    for (std::uint64_t k = 0; k < count; ++k) {
      const std::uint64_t r = next + k;
      if (reps[k].aborted) {
        aborted.push_back(r);
        continue;
      }
      pending += std::to_string(r) + ',' + fmt17(reps[k].raw) + ',' + fmt17(prep.rescale(reps[k].raw)) + '\n';
    }
    next += count;
    const auto now = std::chrono::steady_clock::now();
    if (next == total || std::chrono::duration<double>(now - last_flush).count() >= a.checkpoint_seconds) {
      out << pending;
      out.flush();
      pending.clear();
      write_manifest(next == total);
      last_flush = now;
    }
  }
  write_manifest(true);

  const double rate = static_cast<double>(aborted.size()) / static_cast<double>(total);
  if (rate > 1e-3) {
    std::cerr << "aborted replicas: " << aborted.size() << " of " << total << '\n';
    return kExitAborted;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// compare

std::vector<double> read_column(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::string header;
  if (!std::getline(in, header)) throw InvalidArgument(path + " is empty");
  std::vector<std::string> names;
  {
    std::istringstream hs(header);
    std::string f;
    while (std::getline(hs, f, ',')) names.push_back(f);
  }
  const auto it = std::find(names.begin(), names.end(), column);
  if (it == names.end()) throw InvalidArgument(path + " has no column " + column);
  const auto col = static_cast<std::size_t>(it - names.begin());
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f;
    for (std::size_t k = 0; k <= col && std::getline(ls, f, ','); ++k) {
    }
    const double x = std::strtod(f.c_str(), nullptr);
    if (!std::isnan(x)) v.push_back(x);
  }
  if (v.empty()) throw InvalidArgument(path + " holds no samples");
  return v;
}

struct CompareArgs {
  std::string samples, against, law, column = "rescaled";
  double threshold = 0.08;
  int order = kDefaultQuadratureOrder;
};

json stats_json(const SummaryStats& s) {
  json j;
  j["n"] = s.n;
  j["mean"] = s.mean;
  j["mean_se"] = s.mean_se;
  j["variance"] = s.variance;
  j["variance_se"] = s.variance_se;
  j["skewness"] = s.skewness;
  j["skewness_se"] = s.skewness_se;
  return j;
}

int cmd_compare(const CompareArgs& a) {
  const auto x = read_column(a.samples, a.column);
  const Ecdf e(x);
  json j;
  j["samples"] = a.samples;
  j["column"] = a.column;
  j["sample"] = stats_json(summarize(e));
  double ks;
  if (!a.against.empty()) {
    const Ecdf other(read_column(a.against, a.column));
    ks = ks_statistic(e, other);
    j["against"] = a.against;
    j["reference"] = stats_json(summarize(other));
  } else {
    detail::require(!a.law.empty(), "give --law or --against");
    const auto fam = TableFamily::parse(a.law);
    if (!fam || fam->name == "FGOE") throw InvalidArgument("unknown law " + a.law);
    std::optional<CdfTable> local;
    const CdfTable* tp;
    if (fam->name == "F0" || fam->name == "F1") {
      tp = &reference_table(*fam, a.order);
    } else {
      local.emplace(build_table(*fam, a.order));
      tp = &*local;
    }
    const CdfTable& table = *tp;
    std::function<double(double)> ref;
    if (fam->name == "G1") ref = [](double v) { return gaussian_cdf(v); };
    else if (fam->name == "G1_PRODUCT") ref = [f = *fam](double v) { return gaussian_product_cdf(v, f.factor_a, f.factor_b); };
    else ref = [&table](double v) { return table(v); };
    ks = ks_statistic(e, ref);
    const auto [mean, var] = table.moments();
    j["law"] = fam->label();
    j["reference"] = {{"mean", mean}, {"variance", var}};
  }
  j["ks"] = ks;
  j["threshold"] = a.threshold;
  j["pass"] = ks < a.threshold;
  std::cout << j.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// twtab

int cmd_twtab(const std::string& family, int order, const std::string& path) {
  const auto fam = TableFamily::parse(family);
  if (!fam) throw InvalidArgument("unknown table family " + family);
  detail::require(order >= 8 && order <= 1024, "--order must lie in [8, 1024]");
  const CdfTable t = build_table(*fam, order);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  t.write(out);
  return 0;
}

// ---------------------------------------------------------------------------
// map-check

struct MapArgs {
  double rho_minus = 0.6, rho_plus = 0.4, t = 20.0;
  long long max_sum = 20;
  long long replicas = 20000;
  unsigned long long seed = 0;
  std::string out;
};

int cmd_map_check(const MapArgs& a) {
  detail::require(a.replicas >= 1, "--replicas must be at least 1");
  const auto grid = correspondence_grid({a.rho_minus, a.rho_plus}, a.t, a.max_sum,
                                        static_cast<std::uint64_t>(a.replicas), a.seed);
  std::size_t ok = 0;
  std::ostringstream csv;
  csv << "N,M,p_height,se_height,p_lpp,se_lpp,within_3se\n";
  for (const auto& g : grid) {
    const bool w = g.within(3.0);
    ok += w;
    csv << g.shape.n_cols << ',' << g.shape.n_rows << ',' << fmt17(g.result.height.p) << ','
        << fmt17(g.result.height.se) << ',' << fmt17(g.result.lpp.p) << ',' << fmt17(g.result.lpp.se) << ','
        << (w ? 1 : 0) << '\n';
  }
  if (!a.out.empty()) std::ofstream(a.out, std::ios::trunc) << csv.str();
  json j;
  j["rho_minus"] = a.rho_minus;
  j["rho_plus"] = a.rho_plus;
  j["t"] = a.t;
  j["points"] = grid.size();
  j["within_3se"] = ok;
  j["fraction"] = static_cast<double>(ok) / static_cast<double>(grid.size());
  std::cout << j.dump(2) << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo lab for two-sided TASEP and last passage percolation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  ClassifyArgs ca;
  auto* classify = app.add_subcommand("classify", "Regime and scaling constants");
  classify->add_option("--pi", ca.pi, "Bottom-row rate");
  classify->add_option("--eta", ca.eta, "Left-column rate");
  classify->add_option("--gamma", ca.gamma, "Aspect ratio sqrt(M/N)");
  classify->add_option("--N", ca.n, "Columns, to instantiate center and scale");
  classify->add_option("--M", ca.m, "Rows, to instantiate center and scale");
  classify->add_option("--rho-minus", ca.rho_minus, "Left density");
  classify->add_option("--rho-plus", ca.rho_plus, "Right density");
  classify->add_option("--y", ca.y, "Observer speed");
  classify->add_option("--t", ca.t, "Time, to instantiate center and scale");
  classify->add_option("--sweep", ca.sweep, "Write a (pi, eta) classification grid CSV");
  classify->add_option("--curves", ca.curves, "Write the regime boundary curves CSV");
  classify->add_option("--resolution", ca.resolution, "Grid points per axis for --sweep/--curves");
  classify->add_flag("--json", ca.as_json, "JSON output");

  SimArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run an ensemble and write replica,raw,rescaled CSV");
  simulate->add_option("--model", sa.cfg.model, "lpp, tasep or mapping");
  simulate->add_option("--boundary", sa.cfg.boundary, "LPP boundary: two-sided or zero");
  simulate->add_option("--pi", sa.cfg.pi);
  simulate->add_option("--eta", sa.cfg.eta);
  simulate->add_option("--gamma", sa.cfg.gamma, "Used for M = round(gamma^2 N) when --M is absent");
  simulate->add_option("--N", sa.cfg.n);
  simulate->add_option("--M", sa.cfg.m);
  simulate->add_option("--rho-minus", sa.cfg.rho_minus);
  simulate->add_option("--rho-plus", sa.cfg.rho_plus);
  simulate->add_option("--y", sa.cfg.y);
  simulate->add_option("--t", sa.cfg.t);
  simulate->add_option("--margin", sa.cfg.margin,
                       "TASEP window slack beyond the mean front travel (default 30 + 6 sqrt(t + 1))");
  simulate->add_option("--replicas", sa.cfg.replicas);
  auto* seed_opt = simulate->add_option("--seed", sa.cfg.seed, "Base seed (required)");
  simulate->add_option("--out", sa.cfg.out, "Output CSV");
  simulate->add_option("--manifest", sa.manifest, "Manifest path (default: <out>.manifest.json)");
  auto* from_opt = simulate->add_option("--from-manifest", sa.from_manifest, "Re-run the configuration of a manifest");
  simulate->add_flag("--resume", sa.resume, "Continue an interrupted run");
  simulate->add_option("--checkpoint-seconds", sa.checkpoint_seconds, "Checkpoint interval");

  CompareArgs cpa;
  auto* compare = app.add_subcommand("compare", "KS distance of samples to a law or to other samples");
  compare->add_option("samples", cpa.samples)->required();
  compare->add_option("--law", cpa.law, "F0, F1, G1 or G1_PRODUCT:c");
  compare->add_option("--against", cpa.against, "Second samples CSV for a two-sample test");
  compare->add_option("--column", cpa.column);
  compare->add_option("--threshold", cpa.threshold);
  compare->add_option("--order", cpa.order, "Quadrature order of the reference table");

  std::string tw_family = "F0", tw_path;
  int tw_order = kDefaultQuadratureOrder;
  auto* twtab = app.add_subcommand("twtab", "Write a reference CDF table");
  twtab->add_option("--family", tw_family, "F0, FGOE, F1, G1 or G1_PRODUCT:c");
  twtab->add_option("--order", tw_order, "Gauss-Legendre nodes");
  twtab->add_option("--out", tw_path)->required();

  MapArgs ma;
  auto* mapcheck = app.add_subcommand("map-check", "Both sides of the height/passage-time identity on a grid");
  mapcheck->add_option("--rho-minus", ma.rho_minus);
  mapcheck->add_option("--rho-plus", ma.rho_plus);
  mapcheck->add_option("--t", ma.t);
  mapcheck->add_option("--max-sum", ma.max_sum, "Largest N + M");
  mapcheck->add_option("--replicas", ma.replicas);
  mapcheck->add_option("--seed", ma.seed);
  mapcheck->add_option("--out", ma.out, "Per-point CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*classify) return cmd_classify(ca);
    if (*simulate) {
      if (seed_opt->count() == 0 && from_opt->count() == 0) {
        std::cerr << "simulate: --seed is required\n";
        return kExitInvalid;
      }
      return cmd_simulate(sa);
    }
    if (*compare) return cmd_compare(cpa);
    if (*twtab) return cmd_twtab(tw_family, tw_order, tw_path);
    if (*mapcheck) return cmd_map_check(ma);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
