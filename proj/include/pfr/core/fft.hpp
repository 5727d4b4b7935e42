#pragma once

#include "types.hpp"

#include <complex>
#include <span>

namespace pfr {

/// Centered, orthonormal 2-D DFT over a row-major (rows x cols) buffer, DC at
/// (floor(rows/2), floor(cols/2)). Works in place; `inverse` selects the sign.
/// Instantiated for float and double. Plans are cached per shape and the
/// transform itself is safe to call from several threads.
template <typename T>
void centered_fft2(std::span<std::complex<T>> data, Index rows, Index cols, bool inverse);

/// Image -> full k-space.
CGrid fft2c(CGrid const &img);
/// k-space -> image. Adjoint and inverse of fft2c.
CGrid ifft2c(CGrid const &ksp);

/// Checked wrappers on the domain types.
KSpaceData fft2c(ComplexImage const &img);
ComplexImage ifft2c(KSpaceData const &ksp);

} // namespace pfr
