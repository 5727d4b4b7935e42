#pragma once

#include "core/types.hpp"

namespace pfr {

/// Phase map in radians, (-pi, pi].
struct PhaseEstimate
{
  RGrid phase;
};

ComplexImage zero_fill(KSpaceData const &y);

/// Low-resolution phase from the symmetric band [W - M, M) only. With
/// `apodize` a Hann window centered on DC tapers the band along PE.
PhaseEstimate lowres_phase(KSpaceData const &y, bool apodize = true);

/// Hann taper (or flat window) over the lines of the symmetric band whose
/// mirror is also acquired, zero elsewhere (length W).
Eigen::ArrayXd band_window(SamplingMask const &mask, bool apodize);

/// Classic POCS: alternate magnitude-times-low-res-phase with hard data
/// consistency, starting from the zero-filled image. iters = 0 returns the
/// zero-filled image.
ComplexImage pocs(KSpaceData const &y, int iters = 5, bool apodize = true);

/// Homodyne pre-weighting along PE (length W): 2 on unpaired acquired lines,
/// a linear ramp across the paired band with w(j) + w(mirror j) = 2, and 0 on
/// missing lines.
Eigen::ArrayXd homodyne_weights(SamplingMask const &mask);

ComplexImage homodyne(KSpaceData const &y, bool apodize = true);

/// Fills every missing line from the conjugate of its mirrored partner after
/// removing the global phase of the DC sample (restored afterwards). Exact for
/// images that are real up to a global phase; a negative control otherwise.
ComplexImage conjugate_symmetry_oracle(KSpaceData const &y);

} // namespace pfr
