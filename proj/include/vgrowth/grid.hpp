#pragma once

// Pixel-grid discretization of the denoising/inpainting energies
//
//     E[w] = sum_x F(grad w) + (delta/2) |grad w|^2 + sum_{x not in D} fidelity(w - f)
//
// with forward differences, unit spacing and replicate (Neumann) boundary.

#include <cstdint>
#include <span>
#include <vector>

#include "vgrowth/density.hpp"
#include "vgrowth/geometry.hpp"

namespace vgrowth {

/// Row-major scalar field; pixel (x, y) lives at y * width + x.
class GridImage {
 public:
  GridImage() = default;
  GridImage(int width, int height, double fill = 0.0);
  GridImage(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int x, int y) { return values_[index(x, y)]; }
  double operator()(int x, int y) const { return values_[index(x, y)]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_shape(const GridImage& other) const { return width_ == other.width_ && height_ == other.height_; }
  bool in_unit_range() const;

  friend bool operator==(const GridImage&, const GridImage&) = default;

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Inpainting region D (true = pixel in D).  Never covers the whole image.
class InpaintMask {
 public:
  InpaintMask() = default;
  /// Empty mask: pure denoising.
  InpaintMask(int width, int height);
  /// Throws FullCoverage if every flag is set.
  InpaintMask(int width, int height, std::vector<std::uint8_t> flags);

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_region(std::size_t i) const { return !flags_.empty() && flags_[i] != 0; }
  double coverage() const;
  std::span<const std::uint8_t> flags() const { return flags_; }

  friend bool operator==(const InpaintMask&, const InpaintMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> flags_;  // empty means no pixel in D
};

enum class FidelityKind { Quadratic, Rho };

/// Quadratic: (lambda/2) |w - f|^2.  Rho: rho(|w - f|) with rho(t) = sqrt(1 + t^2) - 1.
struct FidelitySpec {
  FidelityKind kind = FidelityKind::Quadratic;
  double lambda = 1.0;   // Quadratic
  double m_check = 1.0;  // Rho: growth exponent with limsup rho(t)/t^m < inf

  static FidelitySpec quadratic(double lambda);
  static FidelitySpec rho(double m_check = 1.0);

  void validate() const;
  double value(double residual) const;
  double derivative(double residual) const;
  double curvature(double residual) const;
};

struct EnergyReport {
  double total = 0.0;
  double regularizer = 0.0;     // sum of F(grad w)
  double quadratic_term = 0.0;  // (delta/2) sum |grad w|^2
  double fidelity = 0.0;
};

struct VectorField {
  int width = 0;
  int height = 0;
  std::vector<Vec2> values;
};

/// Bundles the data of one discrete minimization problem.
struct Problem {
  GridImage data;
  InpaintMask mask;
  Density density;
  FidelitySpec fidelity;

  /// Checks shapes, 0 <= f <= 1 and the fidelity parameters.
  void validate() const;
};

VectorField forward_gradient(const GridImage& img);
/// Negative adjoint of forward_gradient: <grad u, P> = -<u, div P>.
GridImage divergence(const VectorField& field);

EnergyReport energy(const GridImage& w, const GridImage& f, const InpaintMask& mask, const Density& density,
                    const FidelitySpec& fid, double delta);
GridImage energy_gradient(const GridImage& w, const GridImage& f, const InpaintMask& mask,
                          const Density& density, const FidelitySpec& fid, double delta);

EnergyReport energy(const Problem& problem, const GridImage& w, double delta);
GridImage energy_gradient(const Problem& problem, const GridImage& w, double delta);
/// Hessian of the discrete energy at w applied to direction v.
GridImage energy_hessian_apply(const Problem& problem, const GridImage& w, const GridImage& v, double delta);
/// E[b] - E[a], accumulated pixel by pixel so that tiny decreases survive rounding.
double energy_change(const Problem& problem, const GridImage& a, const GridImage& b, double delta);

/// Pixelwise clamp to [0, 1].
GridImage truncate(const GridImage& img);

/// Pairwise (tree) summation in index order.
double pairwise_sum(std::span<const double> terms);

}  // namespace vgrowth
