#pragma once

// Empirical verification of the structural conditions on a radial density:
// ellipticity bounds, (1,p)-growth, balancing, the doubling condition and the
// total-variation limit of the PhiMu family.  Every constant is an inf/sup over
// a finite sample grid, so reports always carry the range they were fitted on.

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vgrowth/density.hpp"

namespace vgrowth {

enum class Spacing { Linear, Logarithmic };

struct ScanRange {
  double t_min = 1e-3;
  double t_max = 1e4;
  int samples = 2048;
  Spacing spacing = Spacing::Logarithmic;

  void validate() const;
};

/// Sample points of the range; spike densities additionally get every integer node.
std::vector<double> sample_points(const ScanRange& range, const Density& density);

enum class Verdict { Holds, Violated, UnboundedTrend };
std::string to_string(Verdict verdict);

struct TrendPoint {
  double t = 0.0;
  double ratio = 0.0;
};

struct DiagnosticReport {
  std::string condition;
  std::vector<std::pair<std::string, double>> fitted_constants;
  Verdict verdict = Verdict::Holds;
  std::optional<double> witness;  // worst-case t
  std::vector<TrendPoint> trend;  // ratio at dyadic t inside the range
  std::vector<TrendPoint> curve;  // ratio at every sample point
  ScanRange range;

  /// Throws InvalidArgument when the constant is absent.
  double constant(const std::string& name) const;
};

/// Lower/upper Hessian eigenvalues of g(|xi|) at |xi| = t.
std::pair<double, double> hessian_bounds(const Density& density, double t);

/// t^2 max{g''(t), g'(t)/t} / (g(t) + 1).
double balance_ratio(const Density& density, double t);

/// True when the last five doublings all increase without decelerating.
bool unbounded_trend(const std::vector<TrendPoint>& trend);

DiagnosticReport scan_ellipticity(const Density& density, const ScanRange& range);
DiagnosticReport scan_growth(const Density& density, const ScanRange& range);
DiagnosticReport scan_balance(const Density& density, const ScanRange& range);
DiagnosticReport check_delta2(const Density& density, const ScanRange& range);

/// sup_t |(mu - 1) Phi_mu(t) - t| over the range; mu > 2.
double tv_limit_error(double mu, const ScanRange& range);

/// All four scans in a fixed order.
std::vector<DiagnosticReport> verify_density(const Density& density, const ScanRange& range);

std::string report_json(const Density& density, const std::vector<DiagnosticReport>& reports);
void write_curve_csv(std::ostream& out, const DiagnosticReport& report);

}  // namespace vgrowth
