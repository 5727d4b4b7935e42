#include "pfr/train/preprocess.hpp"
#include "pfr/error.hpp"
#include "pfr/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

namespace pfr {

NormalizedSet normalize_set(ImageSet const &reps, double pct)
{
  validate_set(reps);
  std::vector<double> mags;
  mags.reserve(reps.size() * static_cast<std::size_t>(reps.front().data().size()));
  for (auto const &r : reps) {
    RGrid const m = r.magnitude();
    mags.insert(mags.end(), m.data(), m.data() + m.size());
  }
  double const scale = percentile(std::move(mags), pct);
  if (!(scale > 0.0)) { throw NumericalError(fmt::format("degenerate normalization scale {}", scale)); }
  NormalizedSet out;
  out.scale = scale;
  for (auto const &r : reps) {
    out.images.emplace_back(CGrid(r.data() / scale));
  }
  return out;
}

ImageSet flip_readout(ImageSet const &reps)
{
  ImageSet out;
  for (auto const &r : reps) {
    out.emplace_back(CGrid(r.data().colwise().reverse()));
  }
  return out;
}

ImageSet augment(ImageSet const &reps, double flip_probability, std::mt19937_64 &rng)
{
  if (flip_probability <= 0.0) { return reps; }
  bool const flip = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < flip_probability;
  return flip ? flip_readout(reps) : reps;
}

Index subset_size(Index batch, double fraction)
{
  if (!(fraction > 0.0) || fraction > 1.0) { throw InvalidInput(fmt::format("subset fraction {} outside (0, 1]", fraction)); }
  return std::clamp<Index>(static_cast<Index>(std::llround(fraction * static_cast<double>(batch))), 1, batch);
}

ImageSet sample_repetition_subset(ImageSet const &reps, double fraction, std::mt19937_64 &rng)
{
  if (reps.empty()) { throw InvalidInput("empty repetition set"); }
  Index const n = subset_size(static_cast<Index>(reps.size()), fraction);
  std::vector<std::size_t> idx(reps.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (Index i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(n));
  std::sort(idx.begin(), idx.end());
  ImageSet out;
  for (auto i : idx) {
    out.push_back(reps[i]);
  }
  return out;
}

RGrid magnitude_average(std::vector<CGrid> const &reps)
{
  if (reps.empty()) { throw InvalidInput("magnitude average of an empty set"); }
  Index const rows = reps.front().rows(), cols = reps.front().cols();
  for (auto const &r : reps) {
    if (r.rows() != rows || r.cols() != cols) { throw ShapeMismatch("repetitions differ in shape"); }
  }
  RGrid out(rows, cols);
  std::vector<double> v(reps.size());
  for (Index i = 0; i < out.size(); ++i) {
    for (std::size_t b = 0; b < reps.size(); ++b) {
      v[b] = std::abs(reps[b].data()[i]);
    }
    std::sort(v.begin(), v.end());
    double s = 0;
    for (double x : v) {
      s += x;
    }
    out.data()[i] = s / static_cast<double>(reps.size());
  }
  return out;
}

RGrid magnitude_average(ImageSet const &reps)
{
  std::vector<CGrid> g;
  for (auto const &r : reps) {
    g.push_back(r.data());
  }
  return magnitude_average(g);
}

} // namespace pfr
