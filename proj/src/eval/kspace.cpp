#include "pfr/eval/kspace.hpp"
#include "pfr/core/fft.hpp"
#include "pfr/error.hpp"

namespace pfr {

Index max_frequency_line(CGrid const &kspace)
{
  if (kspace.size() == 0) { throw InvalidInput("empty k-space"); }
  Eigen::ArrayXd const colmax = kspace.abs().colwise().maxCoeff().transpose();
  Index best = 0;
  for (Index j = 1; j < colmax.size(); ++j) {
    if (colmax(j) > colmax(best)) { best = j; }
  }
  return best;
}

KmaxHistogram max_freq_histogram(Dataset const &data, PfFactor pff)
{
  if (data.presampled()) { throw InvalidInput("the k-max analysis needs fully sampled data"); }
  SamplingMask const mask(data.width, pff);
  KmaxHistogram h;
  h.counts.assign(static_cast<std::size_t>(data.width), 0);
  for (auto const &slice : data.slices) {
    for (auto const &img : slice) {
      Index const j = max_frequency_line(fft2c(img));
      ++h.counts[static_cast<std::size_t>(j)];
      ++h.total;
      if (!mask.acquired(j)) { ++h.outside; }
    }
  }
  return h;
}

} // namespace pfr
