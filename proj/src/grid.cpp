#include "vgrowth/grid.hpp"

#include <algorithm>
#include <cmath>

#include "vgrowth/error.hpp"

namespace vgrowth {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1 || static_cast<long long>(width) * height < 2)
    throw InvalidArgument("grid needs at least two pixels");
}

struct Terms {
  const GridImage& f;
  const InpaintMask& mask;
  const Density& density;
  const FidelitySpec& fid;
};

void check_terms(const GridImage& w, const Terms& t) {
  if (!w.same_shape(t.f)) throw InvalidArgument("iterate and data have different shapes");
  if (!t.mask.flags().empty() && (t.mask.width() != w.width() || t.mask.height() != w.height()))
    throw InvalidArgument("mask and image have different shapes");
  if (!t.f.in_unit_range()) throw InvalidArgument("data must satisfy 0 <= f <= 1");
  t.fid.validate();
}

Vec2 gradient_at(const GridImage& u, int x, int y) {
  const double c = u(x, y);
  return {x + 1 < u.width() ? u(x + 1, y) - c : 0.0, y + 1 < u.height() ? u(x, y + 1) - c : 0.0};
}

// Applies the adjoint of forward_gradient and adds the result to out.
void add_adjoint(const VectorField& field, GridImage& out) {
  const int w = field.width;
  const int h = field.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec2 p = field.values[static_cast<std::size_t>(y) * w + x];
      if (x + 1 < w) {
        out(x + 1, y) += p.x;
        out(x, y) -= p.x;
      }
      if (y + 1 < h) {
        out(x, y + 1) += p.y;
        out(x, y) -= p.y;
      }
    }
  }
}

EnergyReport energy_impl(const GridImage& w, const Terms& t, double delta) {
  check_terms(w, t);
  if (!(delta >= 0.0)) throw InvalidArgument("delta must be >= 0");
  const std::size_t n = w.size();
  std::vector<double> reg(n), quad(n), fid(n, 0.0);
  for (int y = 0; y < w.height(); ++y) {
    for (int x = 0; x < w.width(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w.width() + x;
      const Vec2 g = gradient_at(w, x, y);
      reg[i] = t.density.value(g);
      quad[i] = 0.5 * delta * dot(g, g);
      if (!t.mask.in_region(i)) fid[i] = t.fid.value(w[i] - t.f[i]);
    }
  }
  EnergyReport rep;
  rep.regularizer = pairwise_sum(reg);
  rep.quadratic_term = pairwise_sum(quad);
  rep.fidelity = pairwise_sum(fid);
  rep.total = rep.regularizer + rep.quadratic_term + rep.fidelity;
  return rep;
}

GridImage gradient_impl(const GridImage& w, const Terms& t, double delta) {
  check_terms(w, t);
  if (!(delta >= 0.0)) throw InvalidArgument("delta must be >= 0");
  VectorField flux{w.width(), w.height(), std::vector<Vec2>(w.size())};
  GridImage out(w.width(), w.height(), 0.0);
  for (int y = 0; y < w.height(); ++y) {
    for (int x = 0; x < w.width(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w.width() + x;
      const Vec2 g = gradient_at(w, x, y);
      flux.values[i] = t.density.gradient(g) + delta * g;
      if (!t.mask.in_region(i)) out[i] = t.fid.derivative(w[i] - t.f[i]);
    }
  }
  add_adjoint(flux, out);
  return out;
}

}  // namespace

GridImage::GridImage(int width, int height, double fill) : width_(width), height_(height) {
  check_dims(width, height);
  values_.assign(static_cast<std::size_t>(width) * height, fill);
}

GridImage::GridImage(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height);
  if (values_.size() != static_cast<std::size_t>(width) * height)
    throw InvalidArgument("pixel count does not match width * height");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidArgument("image values must be finite");
}

bool GridImage::in_unit_range() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

InpaintMask::InpaintMask(int width, int height) : width_(width), height_(height) { check_dims(width, height); }

InpaintMask::InpaintMask(int width, int height, std::vector<std::uint8_t> flags)
    : width_(width), height_(height), flags_(std::move(flags)) {
  check_dims(width, height);
  if (flags_.size() != static_cast<std::size_t>(width) * height)
    throw InvalidArgument("mask size does not match width * height");
  for (auto& f : flags_) f = f ? 1 : 0;
  if (std::all_of(flags_.begin(), flags_.end(), [](std::uint8_t f) { return f != 0; })) throw FullCoverage();
}

double InpaintMask::coverage() const {
  if (flags_.empty()) return 0.0;
  const auto count = std::count(flags_.begin(), flags_.end(), std::uint8_t{1});
  return static_cast<double>(count) / static_cast<double>(flags_.size());
}

FidelitySpec FidelitySpec::quadratic(double lambda) {
  FidelitySpec s;
  s.kind = FidelityKind::Quadratic;
  s.lambda = lambda;
  s.validate();
  return s;
}

FidelitySpec FidelitySpec::rho(double m_check) {
  FidelitySpec s;
  s.kind = FidelityKind::Rho;
  s.m_check = m_check;
  s.validate();
  return s;
}

void FidelitySpec::validate() const {
  if (kind == FidelityKind::Quadratic && !(lambda > 0.0 && std::isfinite(lambda)))
    throw InvalidArgument("quadratic fidelity needs lambda > 0");
  // sqrt(1 + t^2) - 1 grows linearly, so limsup rho(t)/t^m < inf for every m >= 1.
  if (kind == FidelityKind::Rho && !(m_check >= 1.0 && std::isfinite(m_check)))
    throw InvalidArgument("rho fidelity needs m >= 1");
}

double FidelitySpec::value(double r) const {
  if (kind == FidelityKind::Quadratic) return 0.5 * lambda * r * r;
  return r * r / (std::sqrt(1.0 + r * r) + 1.0);
}

double FidelitySpec::derivative(double r) const {
  if (kind == FidelityKind::Quadratic) return lambda * r;
  return r / std::sqrt(1.0 + r * r);
}

double FidelitySpec::curvature(double r) const {
  if (kind == FidelityKind::Quadratic) return lambda;
  const double s = 1.0 + r * r;
  return 1.0 / (s * std::sqrt(s));
}

void Problem::validate() const {
  const Terms t{data, mask, density, fidelity};
  check_terms(data, t);
}

VectorField forward_gradient(const GridImage& img) {
  VectorField out{img.width(), img.height(), std::vector<Vec2>(img.size())};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      out.values[static_cast<std::size_t>(y) * img.width() + x] = gradient_at(img, x, y);
  return out;
}

GridImage divergence(const VectorField& field) {
  GridImage out(field.width, field.height, 0.0);
  add_adjoint(field, out);
  for (auto& v : out.values()) v = -v;
  return out;
}

EnergyReport energy(const GridImage& w, const GridImage& f, const InpaintMask& mask, const Density& density,
                    const FidelitySpec& fid, double delta) {
  return energy_impl(w, Terms{f, mask, density, fid}, delta);
}

GridImage energy_gradient(const GridImage& w, const GridImage& f, const InpaintMask& mask,
                          const Density& density, const FidelitySpec& fid, double delta) {
  return gradient_impl(w, Terms{f, mask, density, fid}, delta);
}

EnergyReport energy(const Problem& problem, const GridImage& w, double delta) {
  return energy_impl(w, Terms{problem.data, problem.mask, problem.density, problem.fidelity}, delta);
}

GridImage energy_gradient(const Problem& problem, const GridImage& w, double delta) {
  return gradient_impl(w, Terms{problem.data, problem.mask, problem.density, problem.fidelity}, delta);
}

GridImage energy_hessian_apply(const Problem& problem, const GridImage& w, const GridImage& v, double delta) {
  if (!w.same_shape(v) || !w.same_shape(problem.data)) throw InvalidArgument("shape mismatch in hessian apply");
  VectorField flux{w.width(), w.height(), std::vector<Vec2>(w.size())};
  GridImage out(w.width(), w.height(), 0.0);
  for (int y = 0; y < w.height(); ++y) {
    for (int x = 0; x < w.width(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w.width() + x;
      const Sym2 h = problem.density.hessian(gradient_at(w, x, y)) + Sym2::identity(delta);
      flux.values[i] = h.apply(gradient_at(v, x, y));
      if (!problem.mask.in_region(i)) out[i] = problem.fidelity.curvature(w[i] - problem.data[i]) * v[i];
    }
  }
  add_adjoint(flux, out);
  return out;
}

double energy_change(const Problem& problem, const GridImage& a, const GridImage& b, double delta) {
  if (!a.same_shape(b) || !a.same_shape(problem.data)) throw InvalidArgument("shape mismatch in energy change");
  std::vector<double> diff(a.size());
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * a.width() + x;
      const Vec2 ga = gradient_at(a, x, y);
      const Vec2 gb = gradient_at(b, x, y);
      double d = problem.density.value(gb) - problem.density.value(ga) + 0.5 * delta * (dot(gb, gb) - dot(ga, ga));
      if (!problem.mask.in_region(i))
        d += problem.fidelity.value(b[i] - problem.data[i]) - problem.fidelity.value(a[i] - problem.data[i]);
      diff[i] = d;
    }
  }
  return pairwise_sum(diff);
}

GridImage truncate(const GridImage& img) {
  GridImage out = img;
  for (auto& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double pairwise_sum(std::span<const double> terms) {
  if (terms.size() <= 8) {
    double s = 0.0;
    for (double v : terms) s += v;
    return s;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

}  // namespace vgrowth
