#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vgrowth/grid.hpp"

namespace vgrowth {

struct SolverConfig {
  double grad_tol = 1e-8;  // sup-norm of the energy gradient
  int max_iters = 10000;
  double delta0 = 1e-2;
  int delta_steps = 8;
  double delta_factor = 0.5;
  double armijo_slope = 1e-4;
  double backtrack = 0.5;

  void validate() const;
  /// delta0 * delta_factor^k.
  double stage_delta(int k) const;
};

enum class SolveStatus { Converged, MaxIterations, Stalled };
std::string to_string(SolveStatus status);

struct DeltaStage {
  double delta = 0.0;
  double energy = 0.0;      // optimal value of the stage
  double sup_change = 0.0;  // sup-norm distance to the previous stage (or to the initial guess)
  int iterations = 0;
};

struct Solution {
  GridImage u;
  EnergyReport report;
  int iterations = 0;
  double grad_norm = 0.0;
  std::vector<DeltaStage> delta_history;
  SolveStatus status = SolveStatus::Converged;
  std::optional<int> failed_stage;
  /// Energy after every accepted iteration, starting with the initial energy.
  std::vector<double> energy_trace;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// Polak-Ribiere(+) nonlinear conjugate gradients with Armijo backtracking.
/// The trial step along each direction is the exact minimizer of the local
/// quadratic model, obtained from a Hessian-vector product.
Solution minimize_fixed_delta(const Problem& problem, double delta, const SolverConfig& config,
                              const GridImage& init);

/// f with every pixel of D replaced by the mean of the unmasked data.
GridImage inpainting_init(const Problem& problem);

/// Solves the regularized problems for delta_k = delta0 * delta_factor^k,
/// warm-starting each stage from the previous one.
Solution continuation_solve(const Problem& problem, const SolverConfig& config);

/// Lattice search for problems with at most four pixels: exhaustive on
/// {0, 1/resolution, ..., 1}, then two local refinements by a factor of ten.
GridImage brute_force_oracle(const Problem& problem, double delta, int resolution = 100);

/// Exponent-window diagnostics for the continuum theory; empty when the
/// configuration lies inside the proven regime.
std::vector<std::string> regime_warnings(const Problem& problem);

void write_history_csv(std::ostream& out, const Solution& solution);

double sup_norm(std::span<const double> v);
double sup_distance(const GridImage& a, const GridImage& b);

}  // namespace vgrowth
