#pragma once

#include "core/types.hpp"
#include "dataset.hpp"

#include <cstdint>
#include <random>

namespace pfr {

enum class PhaseMode
{
  constant,
  smooth_poly,
  smooth_plus_patches
};

std::string to_string(PhaseMode m);
PhaseMode parse_phase_mode(std::string const &s);

/// Controls the synthetic phantom generator. Frequencies are in cycles per
/// field of view along the phase-encode axis.
struct PhantomSpec
{
  Index height = 64;
  Index width = 64;
  int n_ellipses = 6;
  PhaseMode phase_mode = PhaseMode::smooth_plus_patches;
  double constant_phase = 0.0;  // radians, used by PhaseMode::constant
  double smooth_amplitude = 1.0; // radians, scale of the polynomial phase
  int patch_count = 2;           // per repetition
  double patch_min_freq = 10.0;
  double patch_max_freq = 16.0;
  double patch_amplitude = 2.0; // radians
  double patch_width = 0.08;    // Gaussian sigma as a fraction of the PE size
  double noise_sigma = 0.0;
  int n_repetitions = 6;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Where the generator placed a repetition's phase patches.
struct PatchInfo
{
  double row = 0;
  double col = 0;
  double sigma = 0;
  double freq = 0;
};

struct Phantom
{
  ImageSet repetitions;
  RGrid magnitude;                           // shared noiseless magnitude
  std::vector<RGrid> phase;                  // per repetition noiseless phase
  std::vector<std::vector<PatchInfo>> patches; // per repetition
};

/// Ellipse magnitude in [0, 1], shared polynomial phase, per-repetition
/// Gaussian-windowed sinusoidal phase patches and complex Gaussian noise.
/// Deterministic in `spec.seed`.
Phantom generate_phantom(PhantomSpec const &spec);

/// `slices` phantoms, slice i generated with seed slice_seed(spec.seed, i).
Dataset generate_dataset(PhantomSpec const &spec, std::size_t slices);

/// Seed for slice `index` of a dataset generated from `base`.
std::uint64_t slice_seed(std::uint64_t base, std::uint64_t index);

/// Pixels inside the axis-aligned ellipse ((r-r0)/ar)^2 + ((c-c0)/ac)^2 <= 1.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
ellipse_mask(Index rows, Index cols, double center_row, double center_col, double axis_row, double axis_col);

/// Zeroes the magnitude inside the ellipse and adds complex Gaussian noise
/// there (so the magnitude is Rician). Pixels outside are untouched.
ComplexImage inject_void(ComplexImage const &img, double center_row, double center_col, double axis_row,
                         double axis_col, double noise_sigma, std::mt19937_64 &rng);

} // namespace pfr
