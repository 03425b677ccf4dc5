#pragma once

// Radial convex energy densities G(xi) = g(|xi|) with linear lower growth and
// p-power upper growth, together with their first and second derivatives.
//
// Every density is built from its second radial derivative
//
//     g''(t) = omega(t),   g'(0) = g(0) = 0,
//
// so that g(t) = int_0^t (t - r) omega(r) dr.  The PhiMu family has a closed
// form; the remaining families integrate omega numerically on a fixed panel
// table whose breakpoints include every kink of omega.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vgrowth/geometry.hpp"

namespace vgrowth {

enum class Family { PhiMu, Blend, VarExp, SpikeBlend };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Blend weight eta: [0, inf) -> [0, 1].  omega = eta (eps+t)^-mu + (1-eta) (eps+t)^(p-2).
struct SmoothRamp {
  std::function<double(double)> eta;
  std::string label;
  /// Locations where eta changes quickly; used as quadrature breakpoints.
  std::vector<double> features;
};

/// Equivalent blend parametrization omega = Theta(t) (1+t)^-mu with
/// 1 <= Theta(t) <= (1+t)^(mu+p-2).
struct ThetaWeight {
  std::function<double(double)> theta;
  std::string label;
};

/// Spike weight: eta = 0 at every integer k >= 1, eta = 1 away from the
/// intervals [k - eps_k, k + eps_k], linear in between.
struct SpikeWeight {
  std::function<double(int)> eps;  // eps(k) for k >= 1
  std::string label;
};

using WeightSpec = std::variant<SmoothRamp, ThetaWeight, SpikeWeight>;

SmoothRamp constant_ramp(double value);
/// eta(t) = 1 / (1 + exp((t - center) / width)), i.e. mu-type for small t, p-type for large t.
SmoothRamp logistic_ramp(double center, double width);
/// eps_k = first * ratio^(k-1); the default gives eps_k = 2^-k.
SpikeWeight geometric_spikes(double first = 0.5, double ratio = 0.5);

/// Variable exponent rho_hat: [0, inf) -> [2 - mu, p], decreasing, rho_hat(0) = p.
struct ExponentFn {
  std::function<double(double)> rho;
  std::string label;
};

/// rho_hat(r) = (2 - mu) + (p - 2 + mu) / (1 + r).
ExponentFn default_exponent(double mu, double p);

struct DensitySpec {
  Family family = Family::PhiMu;
  double mu = 2.0;
  double p = 1.5;    // ignored by PhiMu
  double eps = 1.0;  // offset in (eps + t); Blend, SpikeBlend and VarExp
  WeightSpec weight = constant_ramp(1.0);
  std::optional<ExponentFn> exponent;  // VarExp only; default_exponent when empty

  static DensitySpec phi_mu(double mu);
  static DensitySpec blend(double mu, double p, WeightSpec weight);
  static DensitySpec var_exp(double mu, double p, double eps = 1.0);
  static DensitySpec spike_blend(double mu, double p, SpikeWeight weight = geometric_spikes());
};

struct ProfileEval {
  double t = 0.0;
  double g = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
};

struct RegularizedEval {
  double value = 0.0;
  Vec2 gradient;
  Sym2 hessian;
};

/// An immutable, validated density.  Cheap to copy (the quadrature table is
/// shared) and safe to use from several threads.
class Density {
 public:
  explicit Density(DensitySpec spec);

  const DensitySpec& spec() const { return spec_; }
  Family family() const { return spec_.family; }
  double mu() const { return spec_.mu; }
  /// Exponent of the upper growth bound: p, or 1 for PhiMu (linear growth).
  double upper_exponent() const;

  /// g''(t).
  double omega(double t) const;
  ProfileEval profile(double t) const;

  double value(Vec2 xi) const;
  Vec2 gradient(Vec2 xi) const;
  Sym2 hessian(Vec2 xi) const;
  RegularizedEval regularized(double delta, Vec2 xi) const;

  /// Points in (lo, hi) where omega fails to be smooth, ascending.
  std::vector<double> kinks(double lo, double hi) const;

  struct Table;

 private:
  ProfileEval closed_form(double t) const;
  ProfileEval tabulated(double t) const;
  double next_breakpoint(double b) const;

  DensitySpec spec_;
  std::shared_ptr<const Table> table_;
};

/// Integrates F(xi) = int_0^1 (1 - s) D^2F(s xi)(xi, xi) ds using only
/// Density::hessian.  Independent check of Density::value.
double taylor_oracle(const Density& density, Vec2 xi, int quad_points = 16);

/// Converts a Theta weight to the equivalent eta weight; throws InvalidArgument
/// naming the first sampled t where Theta leaves its envelope.
SmoothRamp theta_to_eta(const ThetaWeight& theta, double mu, double p);
ThetaWeight eta_to_theta(const SmoothRamp& eta, double mu, double p);

double spike_eta(const SpikeWeight& spikes, double t);

}  // namespace vgrowth
