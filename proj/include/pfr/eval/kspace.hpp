#pragma once

#include "../dataset.hpp"

namespace pfr {

struct KmaxHistogram
{
  std::vector<long> counts; // per PE line, centered order
  long total = 0;
  long outside = 0;  // argmax on a line the PF mask does not acquire
  double outside_fraction() const { return total > 0 ? static_cast<double>(outside) / static_cast<double>(total) : 0.0; }
};

/// PE line holding the largest |k| after taking the maximum over readout.
/// Ties resolve to the lowest index.
Index max_frequency_line(CGrid const &kspace);

/// Histogram over every repetition of an image-domain dataset.
KmaxHistogram max_freq_histogram(Dataset const &data, PfFactor pff);

} // namespace pfr
