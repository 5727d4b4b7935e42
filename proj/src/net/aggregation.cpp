#include "pfr/net/aggregation.hpp"
#include "pfr/error.hpp"

#include <algorithm>

namespace pfr::net {

std::string to_string(Aggregation a)
{
  switch (a) {
  case Aggregation::none: return "none";
  case Aggregation::mean: return "mean";
  case Aggregation::max: return "max";
  }
  return "none";
}

Aggregation parse_aggregation(std::string const &s)
{
  if (s == "none") { return Aggregation::none; }
  if (s == "mean") { return Aggregation::mean; }
  if (s == "max") { return Aggregation::max; }
  throw InvalidInput("unknown aggregation '" + s + "' (expected none, mean or max)");
}

template <typename T>
void aggregate(std::vector<Mat<T>> &features, Aggregation a)
{
  if (a == Aggregation::none || features.empty()) { return; }
  auto const batch = features.size();
  Index const n = features.front().size();
  Mat<T> pooled(features.front().rows(), features.front().cols());
  std::vector<T> vals(batch);
  for (Index i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < batch; ++b) {
      vals[b] = features[b].data()[i];
    }
    if (a == Aggregation::max) {
      pooled.data()[i] = *std::max_element(vals.begin(), vals.end());
    } else {
      std::sort(vals.begin(), vals.end());
      T sum = 0;
      for (T v : vals) {
        sum += v;
      }
      pooled.data()[i] = sum / static_cast<T>(batch);
    }
  }
  for (auto &f : features) {
    f += pooled;
  }
}

template <typename T>
void aggregate_backward(std::vector<Mat<T>> const &pre, std::vector<Mat<T>> &grad, Aggregation a)
{
  if (a == Aggregation::none || grad.empty()) { return; }
  auto const batch = grad.size();
  Mat<T> total = grad.front();
  for (std::size_t b = 1; b < batch; ++b) {
    total += grad[b];
  }
  if (a == Aggregation::mean) {
    total /= static_cast<T>(batch);
    for (auto &g : grad) {
      g += total;
    }
    return;
  }
  Index const n = total.size();
  for (Index i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t b = 1; b < batch; ++b) {
      if (pre[b].data()[i] > pre[best].data()[i]) { best = b; }
    }
    grad[best].data()[i] += total.data()[i];
  }
}

template <typename T>
void append_max_winners(std::vector<Mat<T>> const &pre, std::vector<std::int32_t> &out)
{
  if (pre.empty()) { return; }
  for (Index i = 0; i < pre.front().size(); ++i) {
    std::size_t best = 0;
    for (std::size_t b = 1; b < pre.size(); ++b) {
      if (pre[b].data()[i] > pre[best].data()[i]) { best = b; }
    }
    out.push_back(static_cast<std::int32_t>(best));
  }
}

template <typename T>
void aggregate_max_with(std::vector<Mat<T>> &features, std::int32_t const *winners)
{
  if (features.empty()) { return; }
  Mat<T> pooled(features.front().rows(), features.front().cols());
  for (Index i = 0; i < pooled.size(); ++i) {
    pooled.data()[i] = features.at(static_cast<std::size_t>(winners[i])).data()[i];
  }
  for (auto &f : features) {
    f += pooled;
  }
}

template void aggregate<float>(std::vector<Mat<float>> &, Aggregation);
template void aggregate<double>(std::vector<Mat<double>> &, Aggregation);
template void aggregate_backward<float>(std::vector<Mat<float>> const &, std::vector<Mat<float>> &, Aggregation);
template void aggregate_backward<double>(std::vector<Mat<double>> const &, std::vector<Mat<double>> &, Aggregation);

template void aggregate_max_with<float>(std::vector<Mat<float>> &, std::int32_t const *);
template void aggregate_max_with<double>(std::vector<Mat<double>> &, std::int32_t const *);
template void append_max_winners<float>(std::vector<Mat<float>> const &, std::vector<std::int32_t> &);
template void append_max_winners<double>(std::vector<Mat<double>> const &, std::vector<std::int32_t> &);

} // namespace pfr::net
