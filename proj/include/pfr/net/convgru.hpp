#pragma once

#include "aggregation.hpp"
#include "conv.hpp"

namespace pfr::net {

/// Activations kept from a cell's forward pass for backpropagation.
template <typename T>
struct GruCache
{
  Mat<T> x;
  Mat<T> hprev;
  Mat<T> update;
  Mat<T> reset;
  Mat<T> candidate;
  Mat<T> h;
};

/// Convolutional GRU cell. Gates see the concatenation [h_prev; x]:
///   z = sigmoid(conv_z[h_prev; x]),  r = sigmoid(conv_r[h_prev; x])
///   c = tanh(conv_c[r * h_prev; x]), h = (1 - z) * h_prev + z * c
template <typename T>
class ConvGruCell
{
public:
  ConvGruCell() = default;
  ConvGruCell(std::string const &name, Index in_channels, Index hidden_channels);

  Index in_channels() const { return in_; }
  Index hidden_channels() const { return hidden_; }

  Mat<T> forward(Mat<T> const &x, Mat<T> const &hprev, Shape s, GruCache<T> *cache) const;

  /// Accumulates parameter gradients; writes input and previous-state gradients.
  void backward(GruCache<T> const &cache, Shape s, Mat<T> const &dh, Mat<T> &dx, Mat<T> &dhprev);

  static Index param_count(Index in, Index hidden) { return 3 * conv_param_count(in + hidden, hidden); }

  Conv3x3<T> update;
  Conv3x3<T> reset;
  Conv3x3<T> candidate;

private:
  Index in_ = 0;
  Index hidden_ = 0;
};

/// Stack of G ConvGRU cells carrying hidden states across unrolled
/// iterations. Cell 1 maps 2 -> F channels, the last cell F -> 2, the rest
/// F -> F. Batch aggregation is applied once, to the activation leaving cell
/// G/2; hidden states stay per repetition.
template <typename T>
class RecurrentRegularizer
{
public:
  RecurrentRegularizer() = default;
  RecurrentRegularizer(int depth, int features, Aggregation aggregation);

  void begin(Index batch, Shape s);
  /// Iteration k (1-based). Must be called with k = 1, 2, ... after begin().
  std::vector<Mat<T>> forward(int k, std::vector<Mat<T>> const &x, bool record);
  /// Must be called with k = K, K-1, ..., 1 after a recorded forward.
  std::vector<Mat<T>> backward(int k, std::vector<Mat<T>> const &dz);

  ParamList<T> parameters();
  ConstParamList<T> parameters() const;
  /// Max-pool winners of the recorded iterations (empty unless max pooling).
  std::vector<std::int32_t> activation_pattern() const;
  /// Later forwards reuse these winners (nullptr to release).
  void freeze(std::vector<std::int32_t> const *pattern) { frozen_ = pattern; }

  int depth() const { return static_cast<int>(cells_.size()); }
  int aggregate_after() const { return aggregate_after_; }
  Aggregation aggregation() const { return aggregation_; }

  static Index param_count(int depth, int features);

private:
  std::vector<ConvGruCell<T>> cells_;
  Aggregation aggregation_ = Aggregation::max;
  int aggregate_after_ = 0;
  Shape shape_;
  Index batch_ = 0;
  std::vector<std::vector<Mat<T>>> hidden_;                  // [cell][rep]
  std::vector<std::vector<std::vector<GruCache<T>>>> cache_; // [k-1][cell][rep]
  std::vector<std::vector<Mat<T>>> carry_;                   // [cell][rep]
  std::vector<std::int32_t> const *frozen_ = nullptr;
};

} // namespace pfr::net
