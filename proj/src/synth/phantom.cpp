#include "pfr/synth.hpp"
#include "pfr/error.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numbers>

namespace pfr {

std::string to_string(PhaseMode m)
{
  switch (m) {
  case PhaseMode::constant: return "constant";
  case PhaseMode::smooth_poly: return "smooth_poly";
  case PhaseMode::smooth_plus_patches: return "smooth_plus_patches";
  }
  return "constant";
}

PhaseMode parse_phase_mode(std::string const &s)
{
  if (s == "constant") { return PhaseMode::constant; }
  if (s == "smooth_poly") { return PhaseMode::smooth_poly; }
  if (s == "smooth_plus_patches") { return PhaseMode::smooth_plus_patches; }
  throw InvalidInput("unknown phase mode '" + s + "'");
}

void PhantomSpec::validate() const
{
  if (height < 32 || width < 32) { throw InvalidInput(fmt::format("phantom size {}x{} below 32x32", height, width)); }
  if (n_ellipses < 1) { throw InvalidInput("need at least one ellipse"); }
  if (!(noise_sigma >= 0.0)) { throw InvalidInput("noise_sigma must be non-negative"); }
  if (n_repetitions < 1) { throw InvalidInput("need at least one repetition"); }
  if (patch_count < 0) { throw InvalidInput("patch_count must be non-negative"); }
  if (!(patch_min_freq >= 0.0) || !(patch_max_freq >= patch_min_freq)) {
    throw InvalidInput("patch frequencies must satisfy 0 <= min <= max");
  }
  if (!(patch_width > 0.0)) { throw InvalidInput("patch_width must be positive"); }
}

std::uint64_t slice_seed(std::uint64_t base, std::uint64_t index)
{
  // splitmix64
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
ellipse_mask(Index rows, Index cols, double center_row, double center_col, double axis_row, double axis_col)
{
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      double const dr = (static_cast<double>(r) - center_row) / axis_row;
      double const dc = (static_cast<double>(c) - center_col) / axis_col;
      m(r, c) = dr * dr + dc * dc <= 1.0;
    }
  }
  return m;
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng &rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Rotated ellipse in normalized coordinates u, v in [-1, 1].
bool inside(double u, double v, double cu, double cv, double au, double av, double angle)
{
  double const ca = std::cos(angle), sa = std::sin(angle);
  double const du = u - cu, dv = v - cv;
  double const x = (ca * du + sa * dv) / au;
  double const y = (-sa * du + ca * dv) / av;
  return x * x + y * y <= 1.0;
}

RGrid make_magnitude(PhantomSpec const &spec, Rng &rng)
{
  Index const h = spec.height, w = spec.width;
  RGrid mag = RGrid::Zero(h, w);
  double const body_au = uniform(rng, 0.70, 0.85), body_av = uniform(rng, 0.70, 0.85);
  double const body_val = uniform(rng, 0.5, 0.8);
  struct E
  {
    double cu, cv, au, av, angle, val;
  };
  std::vector<E> inner;
  for (int e = 1; e < spec.n_ellipses; ++e) {
    E el;
    el.au = uniform(rng, 0.08, 0.35);
    el.av = uniform(rng, 0.08, 0.35);
    el.cu = uniform(rng, -0.5, 0.5) * body_au;
    el.cv = uniform(rng, -0.5, 0.5) * body_av;
    el.angle = uniform(rng, 0.0, std::numbers::pi);
    el.val = uniform(rng, 0.1, 1.0);
    inner.push_back(el);
  }
  double const su = uniform(rng, -0.1, 0.1), sv = uniform(rng, -0.1, 0.1);
  // Each pixel is the mean over an S x S grid of sub-samples (partial volume).
  int const S = 4;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      double acc = 0;
      for (int i = 0; i < S; ++i) {
        double const u = 2.0 * (static_cast<double>(r) + (i + 0.5) / S) / static_cast<double>(h) - 1.0;
        for (int j = 0; j < S; ++j) {
          double const v = 2.0 * (static_cast<double>(c) + (j + 0.5) / S) / static_cast<double>(w) - 1.0;
          if (!inside(u, v, 0.0, 0.0, body_au, body_av, 0.0)) { continue; }
          double val = body_val;
          for (auto const &el : inner) {
            if (inside(u, v, el.cu, el.cv, el.au, el.av, el.angle)) { val = el.val; }
          }
          acc += std::clamp(val * (1.0 + su * u + sv * v), 0.0, 1.0);
        }
      }
      mag(r, c) = acc / (S * S);
    }
  }
  return mag;
}

RGrid make_smooth_phase(PhantomSpec const &spec, Rng &rng)
{
  Index const h = spec.height, w = spec.width;
  double const offset = uniform(rng, -std::numbers::pi, std::numbers::pi);
  double coef[5];
  for (double &c : coef) {
    c = uniform(rng, -1.0, 1.0) * spec.smooth_amplitude;
  }
  RGrid ph(h, w);
  for (Index r = 0; r < h; ++r) {
    double const u = 2.0 * (static_cast<double>(r) + 0.5) / static_cast<double>(h) - 1.0;
    for (Index c = 0; c < w; ++c) {
      double const v = 2.0 * (static_cast<double>(c) + 0.5) / static_cast<double>(w) - 1.0;
      ph(r, c) = offset + coef[0] * u + coef[1] * v + coef[2] * u * u + coef[3] * u * v + coef[4] * v * v;
    }
  }
  return ph;
}

} // namespace

Phantom generate_phantom(PhantomSpec const &spec)
{
  spec.validate();
  Rng rng(spec.seed);
  Index const h = spec.height, w = spec.width;
  Phantom out;
  out.magnitude = make_magnitude(spec, rng);

  RGrid shared = RGrid::Constant(h, w, spec.constant_phase);
  if (spec.phase_mode != PhaseMode::constant) { shared = make_smooth_phase(spec, rng); }

  std::normal_distribution<double> noise(0.0, 1.0);
  for (int b = 0; b < spec.n_repetitions; ++b) {
    RGrid phase = shared;
    std::vector<PatchInfo> patches;
    if (spec.phase_mode == PhaseMode::smooth_plus_patches) {
      for (int p = 0; p < spec.patch_count; ++p) {
        PatchInfo info;
        info.row = static_cast<double>(h) / 2.0;
        info.col = static_cast<double>(w) / 2.0;
        for (int tries = 0; tries < 1000; ++tries) {
          double const r = uniform(rng, 0.0, static_cast<double>(h));
          double const c = uniform(rng, 0.0, static_cast<double>(w));
          if (out.magnitude(static_cast<Index>(r), static_cast<Index>(c)) > 0.05) {
            info.row = r;
            info.col = c;
            break;
          }
        }
        info.sigma = spec.patch_width * static_cast<double>(w);
        info.freq = uniform(rng, spec.patch_min_freq, spec.patch_max_freq);
        double const psi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        for (Index r = 0; r < h; ++r) {
          for (Index c = 0; c < w; ++c) {
            double const dr = static_cast<double>(r) - info.row;
            double const dc = static_cast<double>(c) - info.col;
            double const win = std::exp(-(dr * dr + dc * dc) / (2.0 * info.sigma * info.sigma));
            phase(r, c) += spec.patch_amplitude * win *
                           std::sin(2.0 * std::numbers::pi * info.freq * dc / static_cast<double>(w) + psi);
          }
        }
        patches.push_back(info);
      }
    }
    CGrid img(h, w);
    for (Index i = 0; i < img.size(); ++i) {
      img.data()[i] = std::polar(out.magnitude.data()[i], phase.data()[i]);
    }
    if (spec.noise_sigma > 0.0) {
      for (Index i = 0; i < img.size(); ++i) {
        double const re = noise(rng);
        double const im = noise(rng);
        img.data()[i] += spec.noise_sigma * Complex(re, im);
      }
    }
    out.repetitions.emplace_back(std::move(img));
    out.phase.push_back(std::move(phase));
    out.patches.push_back(std::move(patches));
  }
  return out;
}

ComplexImage inject_void(ComplexImage const &img, double center_row, double center_col, double axis_row,
                         double axis_col, double noise_sigma, std::mt19937_64 &rng)
{
  if (!(axis_row > 0.0) || !(axis_col > 0.0)) { throw InvalidInput("void axes must be positive"); }
  if (center_row - axis_row < 0.0 || center_row + axis_row > static_cast<double>(img.rows() - 1) ||
      center_col - axis_col < 0.0 || center_col + axis_col > static_cast<double>(img.cols() - 1)) {
    throw InvalidInput(fmt::format("void ellipse at ({}, {}) with axes ({}, {}) leaves the {}x{} image", center_row,
                                   center_col, axis_row, axis_col, img.rows(), img.cols()));
  }
  if (!(noise_sigma >= 0.0)) { throw InvalidInput("noise sigma must be non-negative"); }
  auto const mask = ellipse_mask(img.rows(), img.cols(), center_row, center_col, axis_row, axis_col);
  CGrid out = img.data();
  std::normal_distribution<double> n(0.0, 1.0);
  for (Index i = 0; i < out.size(); ++i) {
    if (!mask.data()[i]) { continue; }
    out.data()[i] = Complex(0.0, 0.0);
    if (noise_sigma > 0.0) {
      double const re = n(rng);
      double const im = n(rng);
      out.data()[i] = noise_sigma * Complex(re, im);
    }
  }
  return ComplexImage(std::move(out));
}

} // namespace pfr

namespace pfr {

Dataset generate_dataset(PhantomSpec const &spec, std::size_t slices)
{
  spec.validate();
  std::vector<ImageSet> sets;
  sets.reserve(slices);
  for (std::size_t i = 0; i < slices; ++i) {
    PhantomSpec s = spec;
    s.seed = slice_seed(spec.seed, i);
    sets.push_back(generate_phantom(s).repetitions);
  }
  return make_dataset(sets);
}

} // namespace pfr
