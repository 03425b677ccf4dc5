#include "vgrowth/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "vgrowth/analysis.hpp"
#include "vgrowth/error.hpp"
#include "vgrowth/imageio.hpp"
#include "vgrowth/solver.hpp"

namespace vgrowth::cli {

namespace {

struct DensityOptions {
  std::string family = "phimu";
  double mu = 1.8;
  double p = 1.5;
  double eps = 1.0;
  std::string eta = "const:0.5";
  std::string spikes = "geometric:0.5:0.5";
};

struct SolveOptions {
  std::string input;
  std::string output;
  std::string mask;
  std::string history;
  std::string fidelity = "quadratic";
  double lambda = 8.0;
  double m_check = 1.0;
  double delta0 = 1e-2;
  int delta_steps = 8;
  double delta_factor = 0.5;
  double tol = 1e-8;
  int max_iters = 10000;
};

struct RangeOptions {
  std::string range = "1e-3,1e4,2048";
  std::string spacing = "log";
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);
  return parts;
}

double to_real(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) throw InvalidArgument("cannot parse " + what + " '" + s + "'");
  return v;
}

void add_density_options(CLI::App* cmd, DensityOptions& o) {
  cmd->add_option("--density", o.family, "density family")->check(CLI::IsMember({"phimu", "blend", "varexp", "spike"}));
  cmd->add_option("--mu", o.mu, "lower ellipticity exponent mu > 1");
  cmd->add_option("--p", o.p, "upper growth exponent p > 1 (unused by phimu)");
  cmd->add_option("--eps", o.eps, "offset eps > 0 in (eps + t)");
  cmd->add_option("--eta", o.eta, "blend weight: const:C or logistic:CENTER:WIDTH");
  cmd->add_option("--spikes", o.spikes, "spike widths eps_k = FIRST*RATIO^(k-1): geometric:FIRST:RATIO");
}

void add_solve_options(CLI::App* cmd, SolveOptions& o) {
  cmd->add_option("--fidelity", o.fidelity, "data term")->check(CLI::IsMember({"quadratic", "rho"}));
  cmd->add_option("--lambda", o.lambda, "quadratic fidelity weight lambda > 0");
  cmd->add_option("--m", o.m_check, "rho fidelity growth exponent m >= 1");
  cmd->add_option("--delta0", o.delta0, "first regularization parameter");
  cmd->add_option("--delta-steps", o.delta_steps, "number of continuation stages");
  cmd->add_option("--delta-factor", o.delta_factor, "delta reduction factor per stage, in (0,1)");
  cmd->add_option("--tol", o.tol, "sup-norm gradient tolerance");
  cmd->add_option("--max-iters", o.max_iters, "iteration limit per stage");
}

void add_range_options(CLI::App* cmd, RangeOptions& o) {
  cmd->add_option("--range", o.range, "scan range tmin,tmax,samples");
  cmd->add_option("--spacing", o.spacing, "sample spacing")->check(CLI::IsMember({"log", "linear"}));
}

Density build_density(const DensityOptions& o) {
  DensitySpec spec;
  spec.family = family_from_string(o.family);
  spec.mu = o.mu;
  spec.p = o.p;
  spec.eps = o.eps;
  if (spec.family == Family::Blend) {
    const auto parts = split(o.eta, ':');
    if (parts.size() == 2 && parts[0] == "const") {
      spec.weight = constant_ramp(to_real(parts[1], "eta constant"));
    } else if (parts.size() == 3 && parts[0] == "logistic") {
      spec.weight = logistic_ramp(to_real(parts[1], "logistic center"), to_real(parts[2], "logistic width"));
    } else {
      throw InvalidArgument("--eta must be const:C or logistic:CENTER:WIDTH");
    }
  } else if (spec.family == Family::SpikeBlend) {
    const auto parts = split(o.spikes, ':');
    if (parts.size() != 3 || parts[0] != "geometric") throw InvalidArgument("--spikes must be geometric:FIRST:RATIO");
    spec.weight = geometric_spikes(to_real(parts[1], "spike width"), to_real(parts[2], "spike ratio"));
  }
  return Density(std::move(spec));
}

SolverConfig build_config(const SolveOptions& o) {
  SolverConfig c;
  c.grad_tol = o.tol;
  c.max_iters = o.max_iters;
  c.delta0 = o.delta0;
  c.delta_steps = o.delta_steps;
  c.delta_factor = o.delta_factor;
  c.validate();
  return c;
}

FidelitySpec build_fidelity(const SolveOptions& o) {
  return o.fidelity == "rho" ? FidelitySpec::rho(o.m_check) : FidelitySpec::quadratic(o.lambda);
}

ScanRange build_range(const RangeOptions& o) {
  const auto parts = split(o.range, ',');
  if (parts.size() != 3) throw InvalidArgument("--range must be tmin,tmax,samples");
  ScanRange r;
  r.t_min = to_real(parts[0], "range start");
  r.t_max = to_real(parts[1], "range end");
  const double samples = to_real(parts[2], "sample count");
  if (samples != std::floor(samples) || samples > 1e7) throw InvalidArgument("sample count must be an integer");
  r.samples = static_cast<int>(samples);
  r.spacing = o.spacing == "linear" ? Spacing::Linear : Spacing::Logarithmic;
  r.validate();
  return r;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path + "'");
  f.precision(17);
  return f;
}

int solve_command(const DensityOptions& dopt, const SolveOptions& sopt, bool need_output, std::ostream& out,
                  std::ostream& err) {
  Density density = build_density(dopt);
  const SolverConfig config = build_config(sopt);
  const FidelitySpec fid = build_fidelity(sopt);

  PgmData input = read_pgm_data(sopt.input);
  InpaintMask mask(input.image.width(), input.image.height());
  if (!sopt.mask.empty()) mask = read_mask(sopt.mask, input.image.width(), input.image.height());
  Problem problem{input.image, mask, std::move(density), fid};
  problem.validate();
  for (const auto& w : regime_warnings(problem)) err << "warning: " << w << '\n';

  const Solution sol = continuation_solve(problem, config);
  if (need_output || !sopt.output.empty()) write_pgm(sol.u, sopt.output, input.maxval);
  if (!sopt.history.empty()) {
    auto f = open_output(sopt.history);
    write_history_csv(f, sol);
    if (!f) throw IoError("failed writing '" + sopt.history + "'");
  }
  out << "status=" << to_string(sol.status) << " iterations=" << sol.iterations << " grad_norm=" << sol.grad_norm
      << " energy=" << sol.report.total << '\n';
  if (!sol.converged()) {
    err << "error: stage " << sol.failed_stage.value_or(0) << " did not converge (" << to_string(sol.status) << ")\n";
    return kNonConvergence;
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variational denoising and inpainting with variable-growth densities", "vgrowth"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  DensityOptions dopt;
  SolveOptions sopt;
  RangeOptions ropt;

  auto* denoise = app.add_subcommand("denoise", "denoise a PGM image by delta-continuation");
  add_density_options(denoise, dopt);
  add_solve_options(denoise, sopt);
  denoise->add_option("--input", sopt.input, "noisy input PGM")->required();
  denoise->add_option("--output", sopt.output, "denoised output PGM")->required();
  denoise->add_option("--history", sopt.history, "delta history CSV");

  auto* inpaint = app.add_subcommand("inpaint", "inpaint and denoise a PGM image");
  add_density_options(inpaint, dopt);
  add_solve_options(inpaint, sopt);
  inpaint->add_option("--input", sopt.input, "input PGM")->required();
  inpaint->add_option("--output", sopt.output, "restored output PGM")->required();
  inpaint->add_option("--mask", sopt.mask, "mask PGM, nonzero marks the inpainting region")->required();
  inpaint->add_option("--history", sopt.history, "delta history CSV");

  std::string report_path;
  std::string curve_prefix;
  bool strict = false;
  auto* verify = app.add_subcommand("verify-density", "scan ellipticity, growth, balance and doubling conditions");
  add_density_options(verify, dopt);
  add_range_options(verify, ropt);
  verify->add_option("--report", report_path, "JSON report")->required();
  verify->add_option("--curves", curve_prefix, "write PREFIX<condition>.csv ratio curves");
  verify->add_flag("--strict", strict, "exit with code 5 when a condition fails");

  std::string profile_path;
  auto* profile = app.add_subcommand("profile-density", "tabulate g, g', g'' and the ellipticity envelopes");
  add_density_options(profile, dopt);
  add_range_options(profile, ropt);
  profile->add_option("--out", profile_path, "CSV output")->required();

  auto* study = app.add_subcommand("study-continuation", "record the delta-continuation history");
  add_density_options(study, dopt);
  add_solve_options(study, sopt);
  study->add_option("--input", sopt.input, "input PGM")->required();
  study->add_option("--mask", sopt.mask, "optional mask PGM");
  study->add_option("--output", sopt.output, "optional output PGM");
  study->add_option("--history", sopt.history, "delta history CSV")->required();

  std::string kind = "disk";
  std::string size = "64x64";
  std::string noise = "none";
  std::string clean_path;
  std::string noisy_path;
  auto* phantom = app.add_subcommand("phantom", "generate a synthetic phantom and its noisy version");
  phantom->add_option("--kind", kind, "phantom shape")->check(CLI::IsMember({"disk", "squares", "ramp"}));
  phantom->add_option("--size", size, "WIDTHxHEIGHT");
  phantom->add_option("--noise", noise, "none, gaussian:SIGMA:SEED or saltpepper:RATE:SEED");
  phantom->add_option("--clean", clean_path, "clean PGM output")->required();
  phantom->add_option("--noisy", noisy_path, "noisy PGM output")->required();

  std::vector<std::string> argv_store{"vgrowth"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (denoise->parsed()) return solve_command(dopt, sopt, true, out, err);
    if (inpaint->parsed()) return solve_command(dopt, sopt, true, out, err);
    if (study->parsed()) return solve_command(dopt, sopt, false, out, err);

    if (verify->parsed()) {
      const Density density = build_density(dopt);
      const ScanRange range = build_range(ropt);
      const auto reports = verify_density(density, range);
      {
        auto f = open_output(report_path);
        f << report_json(density, reports) << '\n';
        if (!f) throw IoError("failed writing '" + report_path + "'");
      }
      bool all_hold = true;
      for (const auto& rep : reports) {
        out << rep.condition << ": " << to_string(rep.verdict) << '\n';
        all_hold = all_hold && rep.verdict == Verdict::Holds;
        if (!curve_prefix.empty()) {
          auto f = open_output(curve_prefix + rep.condition + ".csv");
          write_curve_csv(f, rep);
        }
      }
      if (strict && !all_hold) {
        err << "error: density violates at least one condition on the scanned range\n";
        return kConditionViolated;
      }
      return kSuccess;
    }

    if (profile->parsed()) {
      const Density density = build_density(dopt);
      const ScanRange range = build_range(ropt);
      const double q = density.upper_exponent();
      auto f = open_output(profile_path);
      f << "t,g,g1,g2,lower_env,upper_env\n";
      for (double t : sample_points(range, density)) {
        const ProfileEval e = density.profile(t);
        f << t << ',' << e.g << ',' << e.g1 << ',' << e.g2 << ',' << std::pow(1.0 + t, -density.mu()) << ','
          << std::pow(1.0 + t, q - 2.0) << '\n';
      }
      if (!f) throw IoError("failed writing '" + profile_path + "'");
      return kSuccess;
    }

    if (phantom->parsed()) {
      PhantomSpec spec;
      spec.kind = phantom_kind_from_string(kind);
      const auto dims = split(size, 'x');
      if (dims.size() != 2) throw InvalidArgument("--size must be WIDTHxHEIGHT");
      const double w = to_real(dims[0], "width");
      const double h = to_real(dims[1], "height");
      if (w != std::floor(w) || h != std::floor(h) || w < 1 || h < 1 || w * h < 2 || w > 1e5 || h > 1e5)
        throw InvalidArgument("--size must be positive integers WIDTHxHEIGHT");
      spec.width = static_cast<int>(w);
      spec.height = static_cast<int>(h);
      spec.noise = parse_noise(noise);
      const auto [clean, noisy] = make_phantom(spec);
      write_pgm(clean, clean_path);
      write_pgm(noisy, noisy_path);
      return kSuccess;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  err << "error: no subcommand\n";
  return kUsage;
}

}  // namespace vgrowth::cli
