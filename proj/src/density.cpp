#include "vgrowth/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gauss_legendre.hpp"
#include "vgrowth/error.hpp"

namespace vgrowth {

namespace {

constexpr double kSeriesSwitch = 0.125;
constexpr int kSeriesTerms = 32;
constexpr double kZeroRadius = 1e-12;

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Sample points used to validate user-supplied weight and exponent functions.
const std::vector<double>& validation_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g{0.0};
    constexpr int n = 512;
    for (int i = 0; i < n; ++i) g.push_back(std::pow(10.0, -4.0 + 10.0 * i / (n - 1)));
    for (int k = 1; k <= 64; ++k) g.push_back(k + 0.5);
    std::sort(g.begin(), g.end());
    return g;
  }();
  return grid;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

bool representable_spike(int k, double width) {
  return width > 0.0 && (k - width) < k && (k + width) > k;
}

double table_end_for(Family family) { return family == Family::SpikeBlend ? 32768.0 : 1e8; }

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::PhiMu: return "phimu";
    case Family::Blend: return "blend";
    case Family::VarExp: return "varexp";
    case Family::SpikeBlend: return "spike";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "phimu") return Family::PhiMu;
  if (name == "blend") return Family::Blend;
  if (name == "varexp") return Family::VarExp;
  if (name == "spike") return Family::SpikeBlend;
  throw InvalidArgument("unknown density family '" + name + "'");
}

SmoothRamp constant_ramp(double value) {
  return {[value](double) { return value; }, "const:" + fmt_double(value), {}};
}

SmoothRamp logistic_ramp(double center, double width) {
  require(width > 0.0 && std::isfinite(width) && std::isfinite(center),
          "logistic ramp needs finite center and positive width");
  SmoothRamp ramp;
  ramp.eta = [center, width](double t) { return 1.0 / (1.0 + std::exp((t - center) / width)); };
  ramp.label = "logistic:" + fmt_double(center) + ":" + fmt_double(width);
  for (int k = -8; k <= 8; ++k) {
    const double f = center + 0.5 * k * width;
    if (f > 0.0) ramp.features.push_back(f);
  }
  return ramp;
}

SpikeWeight geometric_spikes(double first, double ratio) {
  require(first > 0.0 && first <= 1.0 && ratio > 0.0 && ratio < 1.0,
          "geometric spikes need 0 < first <= 1 and 0 < ratio < 1");
  return {[first, ratio](int k) { return first * std::pow(ratio, k - 1); },
          "geometric:" + fmt_double(first) + ":" + fmt_double(ratio)};
}

ExponentFn default_exponent(double mu, double p) {
  return {[mu, p](double r) { return (2.0 - mu) + (p - 2.0 + mu) / (1.0 + r); }, "default"};
}

DensitySpec DensitySpec::phi_mu(double mu) {
  DensitySpec s;
  s.family = Family::PhiMu;
  s.mu = mu;
  return s;
}

DensitySpec DensitySpec::blend(double mu, double p, WeightSpec weight) {
  DensitySpec s;
  s.family = Family::Blend;
  s.mu = mu;
  s.p = p;
  s.weight = std::move(weight);
  return s;
}

DensitySpec DensitySpec::var_exp(double mu, double p, double eps) {
  DensitySpec s;
  s.family = Family::VarExp;
  s.mu = mu;
  s.p = p;
  s.eps = eps;
  return s;
}

DensitySpec DensitySpec::spike_blend(double mu, double p, SpikeWeight weight) {
  DensitySpec s;
  s.family = Family::SpikeBlend;
  s.mu = mu;
  s.p = p;
  s.weight = std::move(weight);
  return s;
}

double spike_eta(const SpikeWeight& spikes, double t) {
  const double base = std::floor(t);
  double eta = 1.0;
  for (double kd = base; kd <= base + 1.0; kd += 1.0) {
    if (kd < 1.0) continue;
    const int k = static_cast<int>(kd);
    const double d = std::abs(t - kd);
    if (d == 0.0) return 0.0;
    const double width = spikes.eps(k);
    if (d < width) eta = std::min(eta, d / width);
  }
  return eta;
}

ThetaWeight eta_to_theta(const SmoothRamp& eta, double mu, double p) {
  const double q = p + mu - 2.0;
  auto fn = eta.eta;
  return {[fn, q](double t) {
            const double e = fn(t);
            return e + (1.0 - e) * std::pow(1.0 + t, q);
          },
          "theta(" + eta.label + ")"};
}

SmoothRamp theta_to_eta(const ThetaWeight& theta, double mu, double p) {
  require(mu > 1.0 && p > 1.0, "theta_to_eta needs mu > 1 and p > 1");
  const double q = p + mu - 2.0;
  for (double t : validation_grid()) {
    const double th = theta.theta(t);
    const double upper = std::pow(1.0 + t, q);
    const double slack = 1e-12 * upper;
    if (!(th >= 1.0 - slack && th <= upper + slack)) {
      throw InvalidArgument("Theta weight leaves the envelope [1, (1+t)^(mu+p-2)] at t=" +
                            fmt_double(t) + " (Theta=" + fmt_double(th) + ")");
    }
  }
  auto fn = theta.theta;
  SmoothRamp ramp;
  ramp.label = "eta(" + theta.label + ")";
  // The quotient is 0/0 at t = 0, where omega(0) = 1 independently of eta.
  ramp.eta = [fn, q](double t) {
    const double s = std::max(t, 1e-6);
    const double lq = q * std::log1p(s);
    const double e = (std::exp(lq) - fn(s)) / std::expm1(lq);
    return std::clamp(e, 0.0, 1.0);
  };
  return ramp;
}

struct Density::Table {
  std::vector<double> knots;
  std::vector<double> slope;  // g'(knot)
  std::vector<double> value;  // g(knot)
};

Density::Density(DensitySpec spec) : spec_(std::move(spec)) {
  const auto& s = spec_;
  require(std::isfinite(s.mu) && s.mu > 1.0, "density needs mu > 1, got " + fmt_double(s.mu));
  require(std::isfinite(s.eps) && s.eps > 0.0, "density needs eps > 0, got " + fmt_double(s.eps));
  if (s.family != Family::PhiMu) {
    require(std::isfinite(s.p) && s.p > 1.0, "density needs p > 1, got " + fmt_double(s.p));
  }

  switch (s.family) {
    case Family::PhiMu: break;
    case Family::Blend: {
      if (const auto* ramp = std::get_if<SmoothRamp>(&s.weight)) {
        require(static_cast<bool>(ramp->eta), "blend weight eta is empty");
        for (double t : validation_grid()) {
          const double e = ramp->eta(t);
          require(e >= 0.0 && e <= 1.0,
                  "blend weight eta leaves [0,1] at t=" + fmt_double(t) + " (eta=" + fmt_double(e) + ")");
        }
      } else if (const auto* th = std::get_if<ThetaWeight>(&s.weight)) {
        require(static_cast<bool>(th->theta), "blend weight Theta is empty");
        require(s.eps == 1.0, "Theta-parametrized blends are defined for eps = 1 only");
        theta_to_eta(*th, s.mu, s.p);  // envelope check, throws
      } else {
        throw InvalidArgument("spike weights belong to the spike family");
      }
      break;
    }
    case Family::SpikeBlend: {
      const auto* spikes = std::get_if<SpikeWeight>(&s.weight);
      require(spikes != nullptr && static_cast<bool>(spikes->eps), "spike family needs a spike weight");
      require(spikes->eps(1) <= 1.0, "spike widths need eps_1 <= 1");
      for (int k = 1; k <= 64; ++k) {
        const double e = spikes->eps(k);
        const double next = spikes->eps(k + 1);
        require(std::isfinite(e) && e > 0.0, "spike widths must be positive, eps_" + std::to_string(k));
        require(e + next <= 1.0, "spike intervals overlap at k=" + std::to_string(k));
      }
      break;
    }
    case Family::VarExp: {
      if (!spec_.exponent) spec_.exponent = default_exponent(s.mu, s.p);
      const auto& rho = spec_.exponent->rho;
      require(static_cast<bool>(rho), "variable exponent function is empty");
      require(rho(0.0) == s.p, "variable exponent must satisfy rho(0) = p");
      double prev = rho(0.0);
      for (double t : validation_grid()) {
        const double r = rho(t);
        require(r <= prev && r >= 2.0 - s.mu && r <= s.p,
                "variable exponent must be non-increasing with values in [2-mu, p], violated at t=" +
                    fmt_double(t));
        prev = r;
      }
      break;
    }
  }

  if (s.family == Family::PhiMu) return;

  auto table = std::make_shared<Table>();
  const auto& rule = detail::gauss16();
  const double end = table_end_for(s.family);
  double b = 0.0;
  double slope = 0.0;
  double value = 0.0;
  table->knots.push_back(0.0);
  table->slope.push_back(0.0);
  table->value.push_back(0.0);
  while (b < end) {
    const double c = next_breakpoint(b);
    const double mass = rule.integrate([this](double r) { return omega(r); }, b, c);
    const double moment = rule.integrate([this, c](double r) { return (c - r) * omega(r); }, b, c);
    value += (c - b) * slope + moment;
    slope += mass;
    b = c;
    table->knots.push_back(b);
    table->slope.push_back(slope);
    table->value.push_back(value);
  }
  table_ = std::move(table);
}

double Density::upper_exponent() const { return spec_.family == Family::PhiMu ? 1.0 : spec_.p; }

double Density::omega(double t) const {
  const auto& s = spec_;
  switch (s.family) {
    case Family::PhiMu: return std::pow(1.0 + t, -s.mu);
    case Family::VarExp: return std::pow(s.eps + t, s.exponent->rho(t) - 2.0);
    case Family::Blend:
    case Family::SpikeBlend: {
      if (const auto* th = std::get_if<ThetaWeight>(&s.weight)) return th->theta(t) * std::pow(1.0 + t, -s.mu);
      const double eta = s.family == Family::SpikeBlend ? spike_eta(std::get<SpikeWeight>(s.weight), t)
                                                        : std::get<SmoothRamp>(s.weight).eta(t);
      const double base = s.eps + t;
      return eta * std::pow(base, -s.mu) + (1.0 - eta) * std::pow(base, s.p - 2.0);
    }
  }
  return 0.0;
}

double Density::next_breakpoint(double b) const {
  const double scale = std::min(1.0, spec_.eps);
  double next = b + 0.5 * (scale + b);
  if (const auto* ramp = std::get_if<SmoothRamp>(&spec_.weight); ramp && spec_.family == Family::Blend) {
    for (double f : ramp->features) {
      if (f > b) {
        next = std::min(next, f);
        break;
      }
    }
  }
  if (spec_.family == Family::SpikeBlend) {
    const auto& spikes = std::get<SpikeWeight>(spec_.weight);
    const double base = std::max(1.0, std::floor(b));
    for (double kd = base; kd <= base + 2.0; kd += 1.0) {
      const int k = static_cast<int>(kd);
      const double width = spikes.eps(k);
      if (!representable_spike(k, width)) continue;
      for (double knot : {kd - width, kd, kd + width}) {
        if (knot > b) next = std::min(next, knot);
      }
    }
  }
  return next;
}

std::vector<double> Density::kinks(double lo, double hi) const {
  std::vector<double> out;
  if (spec_.family == Family::SpikeBlend) {
    const auto& spikes = std::get<SpikeWeight>(spec_.weight);
    const double first = std::max(1.0, std::floor(lo));
    for (double kd = first; kd <= std::ceil(hi) + 1.0; kd += 1.0) {
      const int k = static_cast<int>(kd);
      const double width = spikes.eps(k);
      for (double knot : {kd - width, kd, kd + width}) {
        if (knot > lo && knot < hi && (knot == kd || representable_spike(k, width))) out.push_back(knot);
      }
    }
  } else if (spec_.family == Family::Blend) {
    if (const auto* ramp = std::get_if<SmoothRamp>(&spec_.weight)) {
      for (double f : ramp->features)
        if (f > lo && f < hi) out.push_back(f);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ProfileEval Density::closed_form(double t) const {
  const double mu = spec_.mu;
  ProfileEval e{t, 0.0, 0.0, 0.0};
  if (t < kSeriesSwitch) {
    // (1+t)^-mu = sum_n c_n t^n; integrate termwise once and twice.
    double c = 1.0;
    double tn = 1.0;
    for (int n = 0; n < kSeriesTerms; ++n) {
      e.g1 += c * tn * t / (n + 1);
      e.g += c * tn * t * t / ((n + 1.0) * (n + 2.0));
      c *= (-mu - n) / (n + 1.0);
      tn *= t;
    }
    e.g2 = std::pow(1.0 + t, -mu);
    return e;
  }
  const double l = std::log1p(t);
  const double a = 2.0 - mu;
  e.g2 = std::exp(-mu * l);
  e.g1 = -std::expm1((1.0 - mu) * l) / (mu - 1.0);
  const double growth = a == 0.0 ? l : std::expm1(a * l) / a;  // ((1+t)^(2-mu) - 1) / (2-mu)
  e.g = (t - growth) / (mu - 1.0);
  return e;
}

ProfileEval Density::tabulated(double t) const {
  const auto& table = *table_;
  const auto& rule = detail::gauss16();
  auto it = std::upper_bound(table.knots.begin(), table.knots.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - table.knots.begin()) - 1;
  double b = table.knots[i];
  double slope = table.slope[i];
  double value = table.value[i];
  // Beyond the table: walk further panels without memoizing them.
  if (i + 1 == table.knots.size()) {
    for (double c = next_breakpoint(b); c <= t; c = next_breakpoint(b)) {
      const double mass = rule.integrate([this](double r) { return omega(r); }, b, c);
      const double moment = rule.integrate([this, c](double r) { return (c - r) * omega(r); }, b, c);
      value += (c - b) * slope + moment;
      slope += mass;
      b = c;
    }
  }
  ProfileEval e{t, value, slope, omega(t)};
  if (t > b) {
    const double mass = rule.integrate([this](double r) { return omega(r); }, b, t);
    const double moment = rule.integrate([this, t](double r) { return (t - r) * omega(r); }, b, t);
    e.g = value + (t - b) * slope + moment;
    e.g1 = slope + mass;
  }
  return e;
}

ProfileEval Density::profile(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("profile needs finite t >= 0, got " + fmt_double(t));
  if (t == 0.0) return {0.0, 0.0, 0.0, omega(0.0)};
  return spec_.family == Family::PhiMu ? closed_form(t) : tabulated(t);
}

namespace {
void check_finite(Vec2 xi) {
  if (!std::isfinite(xi.x) || !std::isfinite(xi.y)) throw InvalidArgument("density argument must be finite");
}
}  // namespace

double Density::value(Vec2 xi) const {
  check_finite(xi);
  return profile(norm(xi)).g;
}

Vec2 Density::gradient(Vec2 xi) const {
  check_finite(xi);
  const double r = norm(xi);
  if (r == 0.0) return {};
  return (profile(r).g1 / r) * xi;
}

Sym2 Density::hessian(Vec2 xi) const {
  check_finite(xi);
  const double r = norm(xi);
  if (r < kZeroRadius) return Sym2::identity(omega(0.0));
  const ProfileEval e = profile(r);
  const double tangential = e.g1 / r;
  const double radial = e.g2;
  const Vec2 n = (1.0 / r) * xi;
  const double diff = radial - tangential;
  return {tangential + diff * n.x * n.x, diff * n.x * n.y, tangential + diff * n.y * n.y};
}

RegularizedEval Density::regularized(double delta, Vec2 xi) const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidArgument("regularization delta must be >= 0");
  check_finite(xi);
  const double r = norm(xi);
  RegularizedEval out;
  if (r < kZeroRadius) {
    out.value = value(xi);
    out.gradient = gradient(xi);
    out.hessian = Sym2::identity(omega(0.0));
  } else {
    const ProfileEval e = profile(r);
    const double tangential = e.g1 / r;
    const Vec2 n = (1.0 / r) * xi;
    const double diff = e.g2 - tangential;
    out.value = e.g;
    out.gradient = tangential * xi;
    out.hessian = {tangential + diff * n.x * n.x, diff * n.x * n.y, tangential + diff * n.y * n.y};
  }
  out.value += 0.5 * delta * r * r;
  out.gradient = out.gradient + delta * xi;
  out.hessian = out.hessian + Sym2::identity(delta);
  return out;
}

double taylor_oracle(const Density& density, Vec2 xi, int quad_points) {
  if (quad_points < 16) throw InvalidArgument("taylor_oracle needs at least 16 quadrature points");
  check_finite(xi);
  const double r = norm(xi);
  if (r == 0.0) return 0.0;

  // Segments in radius space, graded towards the origin where a singularity
  // of omega sits at distance ~eps, then split at every kink of omega.
  const double h0 = std::min(1.0, density.spec().eps);
  std::vector<double> cuts{0.0};
  for (double s = h0; s < r; s = 2.0 * s + h0) cuts.push_back(s);
  for (double k : density.kinks(0.0, r)) cuts.push_back(k);
  cuts.push_back(r);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const detail::GaussRule rule(quad_points);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i] / r;
    const double b = cuts[i + 1] / r;
    if (!(b > a)) continue;
    total += rule.integrate([&](double s) { return (1.0 - s) * density.hessian(s * xi).quadratic(xi); }, a, b);
  }
  return total;
}

}  // namespace vgrowth
