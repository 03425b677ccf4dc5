#include "vgrowth/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "vgrowth/analysis.hpp"
#include "vgrowth/error.hpp"

namespace vgrowth {

namespace {

double inner(std::span<const double> a, std::span<const double> b) {
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i];
  return pairwise_sum(prod);
}

GridImage axpy(const GridImage& u, double alpha, const GridImage& d) {
  GridImage out = u;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * d[i];
  return out;
}

}  // namespace

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double sup_distance(const GridImage& a, const GridImage& b) {
  if (!a.same_shape(b)) throw InvalidArgument("sup_distance: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void SolverConfig::validate() const {
  if (!(grad_tol > 0.0)) throw InvalidArgument("grad_tol must be positive");
  if (max_iters < 1) throw InvalidArgument("max_iters must be positive");
  if (!(delta0 > 0.0) || !std::isfinite(delta0)) throw InvalidArgument("delta0 must be positive");
  if (delta_steps < 1) throw InvalidArgument("delta_steps must be positive");
  if (!(delta_factor > 0.0 && delta_factor < 1.0)) throw InvalidArgument("delta_factor must lie in (0,1)");
  if (!(armijo_slope > 0.0 && armijo_slope < 0.5)) throw InvalidArgument("Armijo slope factor must lie in (0,1/2)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw InvalidArgument("backtrack factor must lie in (0,1)");
}

double SolverConfig::stage_delta(int k) const { return delta0 * std::pow(delta_factor, k); }

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::Stalled: return "stalled";
  }
  return "unknown";
}

Solution minimize_fixed_delta(const Problem& problem, double delta, const SolverConfig& config,
                              const GridImage& init) {
  config.validate();
  problem.validate();
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be >= 0");
  if (!init.same_shape(problem.data)) throw InvalidArgument("initial guess has the wrong shape");

  Solution sol;
  sol.u = init;
  GridImage g = energy_gradient(problem, sol.u, delta);
  double energy_value = energy(problem, sol.u, delta).total;
  sol.energy_trace.push_back(energy_value);
  GridImage d = g;
  for (auto& v : d.values()) v = -v;
  const int restart_period = static_cast<int>(sol.u.size());
  int since_restart = 0;
  double last_alpha = 1.0;

  sol.grad_norm = sup_norm(g.values());
  while (sol.grad_norm > config.grad_tol) {
    if (sol.iterations >= config.max_iters) {
      sol.status = SolveStatus::MaxIterations;
      break;
    }
    double slope = inner(g.values(), d.values());
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = -g[i];
      slope = inner(g.values(), d.values());
      since_restart = 0;
    }

    bool accepted = false;
    GridImage trial;
    GridImage g_trial;
    double change = 0.0;
    const double noise_band = 1e-10 * (1.0 + std::abs(energy_value));
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const GridImage hd = energy_hessian_apply(problem, sol.u, d, delta);
      const double curvature = inner(d.values(), hd.values());
      double alpha = curvature > 0.0 ? -slope / curvature : 2.0 * last_alpha;
      const double floor = 1e-17 * (1.0 + sup_norm(sol.u.values())) / std::max(sup_norm(d.values()), 1e-300);
      while (alpha > floor) {
        trial = axpy(sol.u, alpha, d);
        change = energy_change(problem, sol.u, trial, delta);
        if (change <= config.armijo_slope * alpha * slope) {
          accepted = true;
        } else if (change <= noise_band) {
          // Decrease below rounding: the energy is convex along d, so a
          // negative slope at the trial point certifies descent.
          g_trial = energy_gradient(problem, trial, delta);
          if (inner(g_trial.values(), d.values()) <= (2.0 * config.armijo_slope - 1.0) * slope) {
            accepted = true;
            change = std::min(change, 0.0);
          }
        }
        if (accepted) {
          last_alpha = alpha;
          break;
        }
        g_trial = GridImage();
        alpha *= config.backtrack;
      }
      if (!accepted) {
        if (since_restart == 0) break;
        // Retry once along steepest descent before giving up.
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = -g[i];
        slope = inner(g.values(), d.values());
        since_restart = 0;
      }
    }
    if (!accepted) {
      sol.status = SolveStatus::Stalled;
      break;
    }
    if (change > 0.0) throw std::logic_error("accepted a step that increased the energy");

    sol.u = std::move(trial);
    energy_value += change;
    sol.energy_trace.push_back(energy_value);
    ++sol.iterations;

    GridImage g_new = g_trial.size() ? std::move(g_trial) : energy_gradient(problem, sol.u, delta);
    std::vector<double> diff(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) diff[i] = g_new[i] - g[i];
    double beta = std::max(0.0, inner(g_new.values(), diff) / inner(g.values(), g.values()));
    if (++since_restart >= restart_period) {
      beta = 0.0;
      since_restart = 0;
    }
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = -g_new[i] + beta * d[i];
    g = std::move(g_new);
    sol.grad_norm = sup_norm(g.values());
  }

  sol.report = energy(problem, sol.u, delta);
  return sol;
}

GridImage inpainting_init(const Problem& problem) {
  const GridImage& f = problem.data;
  std::vector<double> known;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!problem.mask.in_region(i)) known.push_back(f[i]);
  const double mean = pairwise_sum(known) / static_cast<double>(known.size());
  GridImage init = f;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (problem.mask.in_region(i)) init[i] = mean;
  return init;
}

Solution continuation_solve(const Problem& problem, const SolverConfig& config) {
  config.validate();
  problem.validate();
  GridImage current = inpainting_init(problem);
  Solution result;
  result.u = current;
  int total_iterations = 0;
  for (int k = 0; k < config.delta_steps; ++k) {
    const double delta = config.stage_delta(k);
    Solution stage = minimize_fixed_delta(problem, delta, config, current);
    total_iterations += stage.iterations;
    result.delta_history.push_back({delta, stage.report.total, sup_distance(stage.u, current), stage.iterations});
    current = stage.u;
    result.u = stage.u;
    result.report = stage.report;
    result.grad_norm = stage.grad_norm;
    result.status = stage.status;
    result.energy_trace.insert(result.energy_trace.end(), stage.energy_trace.begin(), stage.energy_trace.end());
    if (!stage.converged()) {
      result.failed_stage = k;
      break;
    }
  }
  result.iterations = total_iterations;
  return result;
}

GridImage brute_force_oracle(const Problem& problem, double delta, int resolution) {
  problem.validate();
  const GridImage& f = problem.data;
  const int n = static_cast<int>(f.size());
  if (n > 4) throw InvalidArgument("brute_force_oracle handles at most four pixels");
  if (resolution < 100) throw InvalidArgument("brute_force_oracle needs resolution >= 100");
  if (!(delta >= 0.0)) throw InvalidArgument("delta must be >= 0");
  const int w = f.width();

  // Neighbour indices of each pixel (-1 at the replicate boundary).
  std::array<int, 4> right{-1, -1, -1, -1};
  std::array<int, 4> down{-1, -1, -1, -1};
  for (int i = 0; i < n; ++i) {
    const int x = i % w;
    const int y = i / w;
    if (x + 1 < w) right[i] = i + 1;
    if (y + 1 < f.height()) down[i] = i + w;
  }
  auto local_energy = [&](const std::array<double, 4>& v) {
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vec2 g{right[i] >= 0 ? v[right[i]] - v[i] : 0.0, down[i] >= 0 ? v[down[i]] - v[i] : 0.0};
      e += problem.density.value(g) + 0.5 * delta * dot(g, g);
      if (!problem.mask.in_region(i)) e += problem.fidelity.value(v[i] - f[i]);
    }
    return e;
  };

  // Coarse pass: every pixel value on the lattice, energies from lookup tables.
  const int span = 2 * resolution + 1;
  const double h = 1.0 / resolution;
  std::vector<double> pair_table(static_cast<std::size_t>(span) * span);
  for (int a = -resolution; a <= resolution; ++a) {
    for (int b = -resolution; b <= resolution; ++b) {
      const Vec2 g{a * h, b * h};
      pair_table[static_cast<std::size_t>(a + resolution) * span + (b + resolution)] =
          problem.density.value(g) + 0.5 * delta * dot(g, g);
    }
  }
  std::vector<std::vector<double>> fid_table(n, std::vector<double>(resolution + 1, 0.0));
  for (int i = 0; i < n; ++i)
    if (!problem.mask.in_region(i))
      for (int k = 0; k <= resolution; ++k) fid_table[i][k] = problem.fidelity.value(k * h - f[i]);

  std::array<int, 4> idx{0, 0, 0, 0};
  std::array<int, 4> best_idx{0, 0, 0, 0};
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      const int a = right[i] >= 0 ? idx[right[i]] - idx[i] : 0;
      const int b = down[i] >= 0 ? idx[down[i]] - idx[i] : 0;
      e += pair_table[static_cast<std::size_t>(a + resolution) * span + (b + resolution)] + fid_table[i][idx[i]];
    }
    if (e < best) {
      best = e;
      best_idx = idx;
    }
    int pos = 0;
    while (pos < n && ++idx[pos] > resolution) idx[pos++] = 0;
    if (pos == n) break;
  }

  std::array<double, 4> center{0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) center[i] = best_idx[i] * h;
  best = local_energy(center);

  double step = h;
  for (int round = 0; round < 2; ++round) {
    step /= 10.0;
    const std::array<double, 4> base = center;
    std::array<int, 4> off{-10, -10, -10, -10};
    for (int i = n; i < 4; ++i) off[i] = 0;
    while (true) {
      std::array<double, 4> v = base;
      bool inside = true;
      for (int i = 0; i < n; ++i) {
        v[i] = base[i] + off[i] * step;
        if (v[i] < -1e-15 || v[i] > 1.0 + 1e-15) inside = false;
        v[i] = std::clamp(v[i], 0.0, 1.0);
      }
      if (inside) {
        const double e = local_energy(v);
        if (e < best) {
          best = e;
          center = v;
        }
      }
      int pos = 0;
      while (pos < n && ++off[pos] > 10) off[pos++] = -10;
      if (pos == n) break;
    }
  }

  GridImage out(f.width(), f.height(), 0.0);
  for (int i = 0; i < n; ++i) out[i] = center[i];
  return out;
}

std::vector<std::string> regime_warnings(const Problem& problem) {
  std::vector<std::string> out;
  const Density& density = problem.density;
  const double mu = density.mu();
  const double p = density.upper_exponent();
  std::ostringstream os;
  os << "mu=" << mu << ", p=" << p;
  if (problem.fidelity.kind == FidelityKind::Quadratic) {
    if (!(mu < 2.0 && p < 2.0))
      out.push_back("quadratic fidelity outside the exponent window mu, p < 2 (" + os.str() +
                    "); the discrete problem is still solved");
  } else {
    const bool strict_window = mu > 1.0 && mu < 1.5 && p < mu;
    if (!strict_window) {
      const bool balanced =
          p < 2.0 && scan_balance(density, ScanRange{}).verdict == Verdict::Holds;
      if (!balanced)
        out.push_back("rho fidelity outside the exponent window 1 < mu < 3/2, p < mu (or balanced density with p < 2) (" +
                      os.str() + "); the discrete problem is still solved");
    }
  }
  if (density.family() == Family::SpikeBlend && density.spec().p > 2.0)
    out.push_back("spike density with p > 2: the linear growth bound is only established for p <= 2");
  return out;
}

void write_history_csv(std::ostream& out, const Solution& solution) {
  out.precision(17);
  out << "delta,energy,sup_change\n";
  for (const auto& s : solution.delta_history) out << s.delta << ',' << s.energy << ',' << s.sup_change << '\n';
}

}  // namespace vgrowth
