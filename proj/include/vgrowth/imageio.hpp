#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>

#include "vgrowth/grid.hpp"

namespace vgrowth {

struct PgmData {
  GridImage image;
  int maxval = 255;
};

/// Binary P5 PGM with maxval 255 or 65535 (16-bit samples big-endian);
/// values are mapped linearly onto [0, 1].
PgmData read_pgm_data(const std::filesystem::path& path);
GridImage read_pgm(const std::filesystem::path& path);
/// Values are clamped to [0, 1] and rounded to the nearest level.
void write_pgm(const GridImage& img, const std::filesystem::path& path, int maxval = 255);

/// Nonzero pixels belong to D.  Throws FullCoverage when every pixel is set.
InpaintMask read_mask(const std::filesystem::path& path, int width, int height);
void write_mask(const InpaintMask& mask, const std::filesystem::path& path);

enum class PhantomKind { Disk, Squares, Ramp };
enum class NoiseKind { None, Gaussian, SaltPepper };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  double sigma = 0.0;  // Gaussian standard deviation
  double rate = 0.0;   // salt-and-pepper probability
  std::uint64_t seed = 0;
};

struct PhantomSpec {
  PhantomKind kind = PhantomKind::Disk;
  int width = 64;
  int height = 64;
  NoiseSpec noise;
};

PhantomKind phantom_kind_from_string(const std::string& name);
/// "none", "gaussian:SIGMA:SEED" or "saltpepper:RATE:SEED".
NoiseSpec parse_noise(const std::string& text);

/// Returns (clean, noisy).  Deterministic in the seed; noisy values clamped to [0, 1].
std::pair<GridImage, GridImage> make_phantom(const PhantomSpec& spec);

/// Peak signal-to-noise ratio for peak 1 in dB; +infinity for identical images.
double psnr(const GridImage& a, const GridImage& b);

}  // namespace vgrowth
