#include "vgrowth/imageio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vgrowth/error.hpp"

namespace vgrowth {

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

struct HeaderParser {
  const std::vector<unsigned char>& bytes;
  std::size_t pos = 0;
  const std::string& name;

  void skip_blank() {
    while (pos < bytes.size()) {
      if (is_space(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  long number() {
    skip_blank();
    if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9')
      throw IoError("malformed PGM header in '" + name + "'");
    long v = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1'000'000'000) throw IoError("PGM header value too large in '" + name + "'");
    }
    return v;
  }
};

struct RawPgm {
  int width;
  int height;
  int maxval;
  std::vector<std::uint32_t> samples;
};

RawPgm read_raw(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  const std::string name = path.string();
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw IoError("'" + name + "' is not a P5 PGM file");
  HeaderParser hp{bytes, 2, name};
  const long width = hp.number();
  const long height = hp.number();
  const long maxval = hp.number();
  if (hp.pos >= bytes.size() || !is_space(bytes[hp.pos])) throw IoError("malformed PGM header in '" + name + "'");
  ++hp.pos;
  if (width < 1 || height < 1) throw IoError("PGM '" + name + "' has an empty raster");
  if (maxval != 255 && maxval != 65535)
    throw IoError("PGM '" + name + "' has unsupported maxval " + std::to_string(maxval));
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t bps = maxval == 255 ? 1 : 2;
  if (bytes.size() - hp.pos < count * bps) throw IoError("PGM '" + name + "' has a truncated payload");
  RawPgm raw{static_cast<int>(width), static_cast<int>(height), static_cast<int>(maxval), {}};
  raw.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = hp.pos + i * bps;
    raw.samples[i] = bps == 1 ? bytes[at] : (static_cast<std::uint32_t>(bytes[at]) << 8) | bytes[at + 1];
    if (raw.samples[i] > static_cast<std::uint32_t>(maxval))
      throw IoError("PGM '" + name + "' has samples above maxval");
  }
  return raw;
}

void write_raw(const std::filesystem::path& path, int width, int height, int maxval,
               const std::vector<std::uint32_t>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "P5\n" << width << ' ' << height << '\n' << maxval << '\n';
  std::string payload;
  payload.reserve(samples.size() * (maxval == 255 ? 1 : 2));
  for (std::uint32_t s : samples) {
    if (maxval == 255) {
      payload.push_back(static_cast<char>(s));
    } else {
      payload.push_back(static_cast<char>(s >> 8));
      payload.push_back(static_cast<char>(s & 0xff));
    }
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// One mt19937_64 stream per row keeps generation order-independent across rows.
std::mt19937_64 row_stream(std::uint64_t seed, int row) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(row) + 1)));
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Box-Muller; std::normal_distribution is not reproducible across standard libraries.
double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double parse_real(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("cannot parse " + what + " '" + s + "'");
  }
  if (used != s.size()) throw InvalidArgument("cannot parse " + what + " '" + s + "'");
  return v;
}

}  // namespace

PgmData read_pgm_data(const std::filesystem::path& path) {
  RawPgm raw = read_raw(path);
  std::vector<double> values(raw.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(raw.samples[i]) / raw.maxval;
  if (static_cast<long long>(raw.width) * raw.height < 2) throw IoError("PGM '" + path.string() + "' has a single pixel");
  return {GridImage(raw.width, raw.height, std::move(values)), raw.maxval};
}

GridImage read_pgm(const std::filesystem::path& path) { return read_pgm_data(path).image; }

void write_pgm(const GridImage& img, const std::filesystem::path& path, int maxval) {
  if (maxval != 255 && maxval != 65535) throw InvalidArgument("PGM maxval must be 255 or 65535");
  std::vector<std::uint32_t> samples(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = std::clamp(img[i], 0.0, 1.0);
    samples[i] = static_cast<std::uint32_t>(std::lround(v * maxval));
  }
  write_raw(path, img.width(), img.height(), maxval, samples);
}

InpaintMask read_mask(const std::filesystem::path& path, int width, int height) {
  RawPgm raw = read_raw(path);
  if (raw.width != width || raw.height != height)
    throw InvalidArgument("mask '" + path.string() + "' is " + std::to_string(raw.width) + "x" +
                          std::to_string(raw.height) + ", expected " + std::to_string(width) + "x" +
                          std::to_string(height));
  std::vector<std::uint8_t> flags(raw.samples.size());
  for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = raw.samples[i] != 0 ? 1 : 0;
  return InpaintMask(width, height, std::move(flags));
}

void write_mask(const InpaintMask& mask, const std::filesystem::path& path) {
  std::vector<std::uint32_t> samples(static_cast<std::size_t>(mask.width()) * mask.height(), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = mask.in_region(i) ? 255 : 0;
  write_raw(path, mask.width(), mask.height(), 255, samples);
}

PhantomKind phantom_kind_from_string(const std::string& name) {
  if (name == "disk") return PhantomKind::Disk;
  if (name == "squares") return PhantomKind::Squares;
  if (name == "ramp") return PhantomKind::Ramp;
  throw InvalidArgument("unknown phantom kind '" + name + "'");
}

NoiseSpec parse_noise(const std::string& text) {
  NoiseSpec spec;
  if (text == "none") return spec;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3) throw InvalidArgument("noise must be none, gaussian:SIGMA:SEED or saltpepper:RATE:SEED");
  const double level = parse_real(parts[1], "noise level");
  std::size_t used = 0;
  unsigned long long seed = 0;
  try {
    seed = std::stoull(parts[2], &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != parts[2].size()) throw InvalidArgument("cannot parse noise seed '" + parts[2] + "'");
  spec.seed = seed;
  if (parts[0] == "gaussian") {
    if (!(level >= 0.0) || !std::isfinite(level)) throw InvalidArgument("gaussian sigma must be >= 0");
    spec.kind = NoiseKind::Gaussian;
    spec.sigma = level;
  } else if (parts[0] == "saltpepper") {
    if (!(level >= 0.0 && level <= 1.0)) throw InvalidArgument("salt-and-pepper rate must lie in [0,1]");
    spec.kind = NoiseKind::SaltPepper;
    spec.rate = level;
  } else {
    throw InvalidArgument("unknown noise kind '" + parts[0] + "'");
  }
  return spec;
}

std::pair<GridImage, GridImage> make_phantom(const PhantomSpec& spec) {
  const int w = spec.width;
  const int h = spec.height;
  GridImage clean(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      double v = 0.0;
      switch (spec.kind) {
        case PhantomKind::Disk: {
          const double r = 0.3 * std::min(w, h);
          v = std::hypot(px - 0.5 * w, py - 0.5 * h) <= r ? 0.8 : 0.2;
          break;
        }
        case PhantomKind::Squares: {
          v = 0.1;
          if (px >= w / 8.0 && px < w / 2.0 && py >= h / 8.0 && py < h / 2.0) v = 0.9;
          if (px >= w / 2.0 && px < 7.0 * w / 8.0 && py >= h / 2.0 && py < 7.0 * h / 8.0) v = 0.5;
          if (px >= 5.0 * w / 8.0 && px < 7.0 * w / 8.0 && py >= h / 8.0 && py < 3.0 * h / 8.0) v = 0.7;
          break;
        }
        case PhantomKind::Ramp:
          v = (w + h > 2) ? static_cast<double>(x + y) / (w + h - 2) : 0.0;
          break;
      }
      clean(x, y) = v;
    }
  }

  GridImage noisy = clean;
  const NoiseSpec& noise = spec.noise;
  if (noise.kind == NoiseKind::Gaussian && noise.sigma > 0.0) {
    for (int y = 0; y < h; ++y) {
      auto rng = row_stream(noise.seed, y);
      for (int x = 0; x < w; ++x) noisy(x, y) = std::clamp(clean(x, y) + noise.sigma * standard_normal(rng), 0.0, 1.0);
    }
  } else if (noise.kind == NoiseKind::SaltPepper && noise.rate > 0.0) {
    for (int y = 0; y < h; ++y) {
      auto rng = row_stream(noise.seed, y);
      for (int x = 0; x < w; ++x) {
        const double u = uniform01(rng);
        const double coin = uniform01(rng);
        if (u < noise.rate) noisy(x, y) = coin < 0.5 ? 0.0 : 1.0;
      }
    }
  }
  return {std::move(clean), std::move(noisy)};
}

double psnr(const GridImage& a, const GridImage& b) {
  if (!a.same_shape(b)) throw InvalidArgument("psnr: shape mismatch");
  std::vector<double> sq(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) sq[i] = (a[i] - b[i]) * (a[i] - b[i]);
  const double mse = pairwise_sum(sq) / static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace vgrowth
