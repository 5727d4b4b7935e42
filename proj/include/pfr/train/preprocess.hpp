#pragma once

#include "../core/types.hpp"

#include <random>

namespace pfr {

struct NormalizedSet
{
  ImageSet images;
  double scale = 1.0;
};

/// Divides every repetition by the 98th percentile of the magnitudes pooled
/// over the whole set.
NormalizedSet normalize_set(ImageSet const &reps, double pct = 98.0);

/// With probability p, reverses the readout (row) axis of every repetition.
ImageSet augment(ImageSet const &reps, double flip_probability, std::mt19937_64 &rng);
ImageSet flip_readout(ImageSet const &reps);

/// Uniform subset without replacement of max(1, round(fraction * B)) items,
/// returned in their original order.
ImageSet sample_repetition_subset(ImageSet const &reps, double fraction, std::mt19937_64 &rng);
Index subset_size(Index batch, double fraction);

/// Element-wise mean magnitude across the set. Each pixel is summed in sorted
/// order so the result is independent of repetition order.
RGrid magnitude_average(ImageSet const &reps);
RGrid magnitude_average(std::vector<CGrid> const &reps);

} // namespace pfr
