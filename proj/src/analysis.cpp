#include "vgrowth/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "json.hpp"
#include "vgrowth/error.hpp"

namespace vgrowth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kTrendWindow = 5;
// Increments shrinking faster than this per doubling indicate convergence.
constexpr double kTrendDeceleration = 0.9;

std::vector<TrendPoint> dyadic_trend(const ScanRange& range, auto&& ratio) {
  std::vector<TrendPoint> out;
  const double lo = std::max(range.t_min, std::numeric_limits<double>::min());
  for (int j = static_cast<int>(std::ceil(std::log2(lo))); std::ldexp(1.0, j) <= range.t_max; ++j) {
    const double t = std::ldexp(1.0, j);
    if (t < range.t_min) continue;
    out.push_back({t, ratio(t)});
  }
  return out;
}

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

void ScanRange::validate() const {
  if (!(t_min >= 0.0) || !std::isfinite(t_max) || !(t_min < t_max))
    throw InvalidArgument("scan range needs 0 <= t_min < t_max");
  if (samples < 16) throw InvalidArgument("scan range needs at least 16 samples");
  if (spacing == Spacing::Logarithmic && t_min <= 0.0)
    throw InvalidArgument("logarithmic scan range needs t_min > 0");
}

std::vector<double> sample_points(const ScanRange& range, const Density& density) {
  range.validate();
  std::vector<double> pts;
  pts.reserve(range.samples);
  const int n = range.samples;
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / (n - 1);
    if (range.spacing == Spacing::Linear) {
      pts.push_back(range.t_min + u * (range.t_max - range.t_min));
    } else {
      pts.push_back(range.t_min * std::pow(range.t_max / range.t_min, u));
    }
  }
  pts.front() = range.t_min;
  pts.back() = range.t_max;
  if (density.family() == Family::SpikeBlend) {
    for (double k = std::max(1.0, std::ceil(range.t_min)); k <= range.t_max; k += 1.0) pts.push_back(k);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  }
  return pts;
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    case Verdict::UnboundedTrend: return "unbounded-trend";
  }
  return "unknown";
}

double DiagnosticReport::constant(const std::string& name) const {
  for (const auto& [key, value] : fitted_constants)
    if (key == name) return value;
  throw InvalidArgument("report '" + condition + "' has no constant '" + name + "'");
}

std::pair<double, double> hessian_bounds(const Density& density, double t) {
  const ProfileEval e = density.profile(t);
  if (t == 0.0) return {e.g2, e.g2};
  const double tangential = e.g1 / t;
  return {std::min(e.g2, tangential), std::max(e.g2, tangential)};
}

double balance_ratio(const Density& density, double t) {
  if (t == 0.0) return 0.0;
  const ProfileEval e = density.profile(t);
  return t * t * std::max(e.g2, e.g1 / t) / (e.g + 1.0);
}

bool unbounded_trend(const std::vector<TrendPoint>& trend) {
  if (trend.size() < kTrendWindow + 1) return false;
  const std::size_t first = trend.size() - (kTrendWindow + 1);
  double previous = -1.0;
  for (std::size_t i = first; i + 1 < trend.size(); ++i) {
    const double inc = trend[i + 1].ratio - trend[i].ratio;
    if (!(inc > 0.0)) return false;
    if (previous > 0.0 && inc < kTrendDeceleration * previous) return false;
    previous = inc;
  }
  return true;
}

DiagnosticReport scan_ellipticity(const Density& density, const ScanRange& range) {
  DiagnosticReport rep;
  rep.condition = "ellipticity";
  rep.range = range;
  const double mu = density.mu();
  const double q = density.upper_exponent();
  double c5 = kInf;
  double c6 = 0.0;
  double worst_t = range.t_min;
  for (double t : sample_points(range, density)) {
    const auto [lo, hi] = hessian_bounds(density, t);
    const double lower = lo * std::pow(1.0 + t, mu);
    const double upper = hi * std::pow(1.0 + t, 2.0 - q);
    rep.curve.push_back({t, lower});
    if (lower < c5) {
      c5 = lower;
      worst_t = t;
    }
    c6 = std::max(c6, upper);
  }
  rep.trend = dyadic_trend(range, [&](double t) { return hessian_bounds(density, t).first * std::pow(1.0 + t, mu); });
  rep.fitted_constants = {{"c5_hat", c5}, {"c6_hat", c6}};
  rep.verdict = (c5 > 0.0 && std::isfinite(c5) && std::isfinite(c6)) ? Verdict::Holds : Verdict::Violated;
  rep.witness = worst_t;
  return rep;
}

DiagnosticReport scan_growth(const Density& density, const ScanRange& range) {
  DiagnosticReport rep;
  rep.condition = "growth";
  rep.range = range;
  const double q = density.upper_exponent();
  // Offset below which the linear lower bound is trivial (case split at |xi| = 2).
  const double c7_tilde = density.profile(2.0).g;
  double c7 = kInf;
  double c8 = 0.0;
  double slope = 0.0;
  double worst_t = range.t_min;
  for (double t : sample_points(range, density)) {
    const double g = density.profile(t).g;
    if (t > 0.0) {
      const double lower = (g + c7_tilde) / t;
      if (lower < c7) {
        c7 = lower;
        worst_t = t;
      }
      if (t >= 1.0) slope = std::max(slope, g / t);
    }
    c8 = std::max(c8, g / (std::pow(t, q) + 1.0));
    rep.curve.push_back({t, t > 0.0 ? g / t : 0.0});
  }
  rep.trend = dyadic_trend(range, [&](double t) { return density.profile(t).g / t; });
  rep.fitted_constants = {{"c7_hat", c7}, {"c7_tilde", c7_tilde}, {"c8_hat", c8}, {"linear_slope_hat", slope}};
  const bool ok = c7 > 0.0 && std::isfinite(c7) && c8 > 0.0 && std::isfinite(c8);
  rep.verdict = ok ? Verdict::Holds : Verdict::Violated;
  rep.witness = worst_t;
  return rep;
}

DiagnosticReport scan_balance(const Density& density, const ScanRange& range) {
  DiagnosticReport rep;
  rep.condition = "balance";
  rep.range = range;
  double sup = 0.0;
  double worst_t = range.t_min;
  for (double t : sample_points(range, density)) {
    const double r = balance_ratio(density, t);
    rep.curve.push_back({t, r});
    if (r > sup || !std::isfinite(r)) {
      sup = r;
      worst_t = t;
    }
  }
  rep.trend = dyadic_trend(range, [&](double t) { return balance_ratio(density, t); });
  rep.fitted_constants = {{"balance_sup", sup}};
  if (!std::isfinite(sup)) {
    rep.verdict = Verdict::Violated;
  } else if (unbounded_trend(rep.trend)) {
    rep.verdict = Verdict::UnboundedTrend;
    worst_t = rep.trend.back().t;
  } else {
    rep.verdict = Verdict::Holds;
  }
  rep.witness = worst_t;
  return rep;
}

DiagnosticReport check_delta2(const Density& density, const ScanRange& range) {
  DiagnosticReport rep;
  rep.condition = "delta2";
  rep.range = range;
  auto doubling = [&](double t) { return density.profile(2.0 * t).g / std::max(density.profile(t).g, 1e-12); };
  auto pts = sample_points(range, density);
  const bool any_large = std::any_of(pts.begin(), pts.end(), [](double t) { return t >= 1.0; });
  double sup = 0.0;
  double worst_t = range.t_min;
  for (double t : pts) {
    if (any_large && t < 1.0) continue;
    const double r = doubling(t);
    rep.curve.push_back({t, r});
    if (r > sup || !std::isfinite(r)) {
      sup = r;
      worst_t = t;
    }
  }
  rep.trend = dyadic_trend(range, doubling);
  rep.fitted_constants = {{"c52_hat", sup}};
  if (!std::isfinite(sup)) {
    rep.verdict = Verdict::Violated;
  } else if (unbounded_trend(rep.trend)) {
    rep.verdict = Verdict::UnboundedTrend;
  } else {
    rep.verdict = Verdict::Holds;
  }
  rep.witness = worst_t;
  return rep;
}

double tv_limit_error(double mu, const ScanRange& range) {
  if (!(mu > 2.0) || !std::isfinite(mu)) throw InvalidArgument("tv_limit_error needs mu > 2");
  const Density density(DensitySpec::phi_mu(mu));
  double sup = 0.0;
  for (double t : sample_points(range, density)) {
    // (mu - 1) Phi_mu(t) - t = ((1+t)^(2-mu) - 1) / (mu - 2), evaluated without cancellation.
    const double a = 2.0 - mu;
    const double residual = -std::expm1(a * std::log1p(t)) / a;
    sup = std::max(sup, std::abs(residual));
  }
  return sup;
}

std::vector<DiagnosticReport> verify_density(const Density& density, const ScanRange& range) {
  return {scan_ellipticity(density, range), scan_growth(density, range), scan_balance(density, range),
          check_delta2(density, range)};
}

std::string report_json(const Density& density, const std::vector<DiagnosticReport>& reports) {
  using nlohmann::json;
  const auto& spec = density.spec();
  json doc;
  doc["density"] = {{"family", to_string(spec.family)}, {"mu", spec.mu}, {"p", spec.p}, {"eps", spec.eps}};
  json list = json::array();
  for (const auto& rep : reports) {
    json constants = json::object();
    for (const auto& [name, value] : rep.fitted_constants) constants[name] = json_number(value);
    json trend = json::array();
    for (const auto& pt : rep.trend) trend.push_back({{"t", pt.t}, {"ratio", json_number(pt.ratio)}});
    list.push_back({{"condition", rep.condition},
                    {"fitted_constants", constants},
                    {"verdict", to_string(rep.verdict)},
                    {"witness", rep.witness ? json_number(*rep.witness) : json()},
                    {"trend", trend},
                    {"range",
                     {{"t_min", rep.range.t_min},
                      {"t_max", rep.range.t_max},
                      {"samples", rep.range.samples},
                      {"spacing", rep.range.spacing == Spacing::Linear ? "linear" : "logarithmic"}}}});
  }
  doc["reports"] = list;
  return doc.dump(2);
}

void write_curve_csv(std::ostream& out, const DiagnosticReport& report) {
  out.precision(17);
  out << "t,ratio\n";
  for (const auto& pt : report.curve) out << pt.t << ',' << pt.ratio << '\n';
}

}  // namespace vgrowth
