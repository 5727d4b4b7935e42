#include "pfr/core/model.hpp"
#include "pfr/core/fft.hpp"
#include "pfr/error.hpp"

#include <fmt/format.h>

namespace pfr {

SamplingMask make_pf_mask(Index pe_size, PfFactor pff) { return SamplingMask(pe_size, pff); }

namespace {
void check_shape(ComplexImage const &img, SamplingMask const &mask)
{
  if (img.cols() != mask.pe_size()) {
    throw ShapeMismatch(fmt::format("image has {} PE columns but mask expects {}", img.cols(), mask.pe_size()));
  }
}
} // namespace

KSpaceData forward(ComplexImage const &img, SamplingMask const &mask)
{
  check_shape(img, mask);
  return KSpaceData::masked(fft2c(img.data()), mask);
}

KSpaceData forward(ComplexImage const &img, SamplingMask const &mask, double noise_sigma, std::mt19937_64 &rng)
{
  check_shape(img, mask);
  if (!(noise_sigma >= 0.0)) { throw InvalidInput("noise sigma must be non-negative"); }
  CGrid k = fft2c(img.data());
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> n(0.0, noise_sigma);
    for (Index i = 0; i < k.size(); ++i) {
      double const re = n(rng);
      double const im = n(rng);
      k.data()[i] += Complex(re, im);
    }
  }
  return KSpaceData::masked(std::move(k), mask);
}

void apply_data_consistency(CGrid &ksp, KSpaceData const &y, double lambda)
{
  if (!(lambda >= 0.0)) { throw InvalidInput(fmt::format("lambda must be non-negative, got {}", lambda)); }
  if (ksp.rows() != y.rows() || ksp.cols() != y.cols()) { throw ShapeMismatch("estimate and measurements differ in shape"); }
  Index const m = y.mask().acquired_count();
  auto const &s = y.samples();
  if (lambda == 0.0) {
    ksp.leftCols(m) = s.leftCols(m);
  } else {
    ksp.leftCols(m) = (lambda * ksp.leftCols(m) + s.leftCols(m)) / (1.0 + lambda);
  }
}

ComplexImage data_consistency(ComplexImage const &z, KSpaceData const &y, double lambda)
{
  CGrid k = fft2c(z.data());
  apply_data_consistency(k, y, lambda);
  return ComplexImage(ifft2c(k));
}

} // namespace pfr
