#pragma once

#include "tensor.hpp"

#include <cstdint>
#include <string>

namespace pfr::net {

/// Pooling across the repetition batch.
enum class Aggregation
{
  none,
  mean,
  max
};

std::string to_string(Aggregation a);
Aggregation parse_aggregation(std::string const &s);

/// f_b <- f_b + pool_b'(f_b') for every b. Mean pooling sums the batch in
/// sorted order per element so the result does not depend on batch order.
template <typename T>
void aggregate(std::vector<Mat<T>> &features, Aggregation a);

/// Turns gradients w.r.t. the aggregated features into gradients w.r.t. the
/// features before aggregation (`pre` are the features that were pooled).
template <typename T>
void aggregate_backward(std::vector<Mat<T>> const &pre, std::vector<Mat<T>> &grad, Aggregation a);

/// Max aggregation with the winning repetition of every element given.
template <typename T>
void aggregate_max_with(std::vector<Mat<T>> &features, std::int32_t const *winners);

/// Index of the repetition holding the per-element maximum, appended to `out`.
template <typename T>
void append_max_winners(std::vector<Mat<T>> const &pre, std::vector<std::int32_t> &out);

} // namespace pfr::net
