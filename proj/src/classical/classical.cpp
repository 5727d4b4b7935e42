#include "pfr/classical.hpp"
#include "pfr/core/fft.hpp"
#include "pfr/core/model.hpp"
#include "pfr/error.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numbers>

namespace pfr {

ComplexImage zero_fill(KSpaceData const &y) { return ComplexImage(ifft2c(y.samples())); }

Eigen::ArrayXd band_window(SamplingMask const &mask, bool apodize)
{
  Index const w = mask.pe_size();
  Index const c = mask.center();
  Index const h = mask.acquired_count() - c;
  Eigen::ArrayXd win = Eigen::ArrayXd::Zero(w);
  for (Index j = mask.band_begin(); j < mask.band_end(); ++j) {
    // For even W the first band line has no acquired partner.
    if (!mask.acquired(mask.mirror(j))) { continue; }
    if (apodize) {
      double const t = std::cos(std::numbers::pi * static_cast<double>(j - c) / (2.0 * static_cast<double>(h)));
      win(j) = t * t;
    } else {
      win(j) = 1.0;
    }
  }
  return win;
}

PhaseEstimate lowres_phase(KSpaceData const &y, bool apodize)
{
  auto const &mask = y.mask();
  if (mask.band_size() < 2) {
    throw InvalidInput(fmt::format("symmetric band of {} lines is too narrow for a phase estimate", mask.band_size()));
  }
  Eigen::ArrayXd const win = band_window(mask, apodize);
  CGrid k = y.samples();
  k.rowwise() *= win.transpose().cast<Complex>();
  return PhaseEstimate{ifft2c(k).arg()};
}

namespace {
void require_partial(KSpaceData const &y)
{
  if (2 * y.mask().acquired_count() <= y.mask().pe_size()) {
    throw UnsupportedFactor("reconstruction needs more than half of the PE lines");
  }
}

CGrid unit_phasor(RGrid const &phase)
{
  CGrid p(phase.rows(), phase.cols());
  for (Index i = 0; i < phase.size(); ++i) {
    p.data()[i] = std::polar(1.0, phase.data()[i]);
  }
  return p;
}
} // namespace

ComplexImage pocs(KSpaceData const &y, int iters, bool apodize)
{
  if (iters < 0) { throw InvalidInput(fmt::format("POCS iteration count must be >= 0, got {}", iters)); }
  require_partial(y);
  CGrid x = ifft2c(y.samples());
  if (iters == 0) { return ComplexImage(std::move(x)); }
  CGrid const phasor = unit_phasor(lowres_phase(y, apodize).phase);
  for (int it = 0; it < iters; ++it) {
    CGrid k = fft2c(CGrid(x.abs().cast<Complex>() * phasor));
    apply_data_consistency(k, y, 0.0);
    x = ifft2c(k);
  }
  return ComplexImage(std::move(x));
}

Eigen::ArrayXd homodyne_weights(SamplingMask const &mask)
{
  Index const w = mask.pe_size();
  if (mask.full()) { return Eigen::ArrayXd::Ones(w); }
  Index const c = mask.center();
  Index const h = mask.acquired_count() - c;
  Eigen::ArrayXd wt = Eigen::ArrayXd::Zero(w);
  for (Index j = 0; j < mask.acquired_count(); ++j) {
    Index const d = j - c;
    wt(j) = (d > -h && d < h) ? 1.0 - static_cast<double>(d) / static_cast<double>(h) : 2.0;
  }
  return wt;
}

ComplexImage homodyne(KSpaceData const &y, bool apodize)
{
  require_partial(y);
  // Nothing is missing, so there is nothing to synthesise.
  if (y.mask().full()) { return zero_fill(y); }
  Eigen::ArrayXd const wt = homodyne_weights(y.mask());
  CGrid k = y.samples();
  k.rowwise() *= wt.transpose().cast<Complex>();
  CGrid const xh = ifft2c(k);
  CGrid const phasor = unit_phasor(lowres_phase(y, apodize).phase);
  CGrid out = (xh * phasor.conjugate()).real().cast<Complex>() * phasor;
  return ComplexImage(std::move(out));
}

ComplexImage conjugate_symmetry_oracle(KSpaceData const &y)
{
  auto const &mask = y.mask();
  Index const rows = y.rows();
  Index const cr = rows / 2;
  Complex const dc = y.samples()(cr, mask.center());
  Complex const rot = std::abs(dc) > 0.0 ? dc / std::abs(dc) : Complex(1.0, 0.0);
  CGrid k = y.samples() * std::conj(rot);
  for (Index j = mask.acquired_count(); j < mask.pe_size(); ++j) {
    Index const mj = mask.mirror(j);
    for (Index r = 0; r < rows; ++r) {
      Index const mr = ((2 * cr - r) % rows + rows) % rows;
      k(r, j) = std::conj(k(mr, mj));
    }
  }
  // Acquired lines are restored bit-exactly.
  for (Index j = 0; j < mask.acquired_count(); ++j) {
    k.col(j) = y.samples().col(j);
  }
  for (Index j = mask.acquired_count(); j < mask.pe_size(); ++j) {
    k.col(j) *= rot;
  }
  return ComplexImage(ifft2c(k));
}

} // namespace pfr
