#pragma once

#include "types.hpp"

#include <random>

namespace pfr {

SamplingMask make_pf_mask(Index pe_size, PfFactor pff);

/// y = A x + n: centered FFT, PF sampling along columns, optional complex
/// Gaussian noise with standard deviation `noise_sigma` per real component.
KSpaceData forward(ComplexImage const &img, SamplingMask const &mask);
KSpaceData forward(ComplexImage const &img, SamplingMask const &mask, double noise_sigma, std::mt19937_64 &rng);

/// Data-consistency proximal step. lambda = 0 replaces acquired lines by the
/// measurements; lambda > 0 blends them as (lambda * k_z + y) / (1 + lambda).
ComplexImage data_consistency(ComplexImage const &z, KSpaceData const &y, double lambda);

/// Same step on a raw k-space grid in place.
void apply_data_consistency(CGrid &ksp, KSpaceData const &y, double lambda);

} // namespace pfr
