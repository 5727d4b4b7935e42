#pragma once

#include "aggregation.hpp"
#include "conv.hpp"

namespace pfr::net {

template <typename T>
struct ResNetCache
{
  Mat<T> x;
  Mat<T> stem;                   // input conv before ReLU
  std::vector<Mat<T>> block_in;  // features entering each block
  std::vector<Mat<T>> block_mid; // first conv of each block before ReLU
  Mat<T> pooled;                 // features that were aggregated
  Mat<T> last;                   // features entering the output conv
};

/// Plain residual regularizer: ReLU(conv 2->F), G blocks f + conv(ReLU(conv f)),
/// linear conv F->2. Batch aggregation follows block G/2.
template <typename T>
class ResNet
{
public:
  ResNet() = default;
  ResNet(std::string const &prefix, int blocks, int features);

  int blocks() const { return static_cast<int>(conv1_.size()); }
  Index features() const { return input_.out_channels(); }

  /// Runs the whole batch; aggregation couples the repetitions.
  /// `frozen`, when given, replaces every ReLU sign and max-pool winner by
  /// the recorded one (layout of ResNetRegularizer::activation_pattern).
  std::vector<Mat<T>> forward(std::vector<Mat<T>> const &x, Shape s, Aggregation a,
                              std::vector<ResNetCache<T>> *cache, std::int32_t const *frozen = nullptr) const;
  std::vector<Mat<T>> backward(std::vector<ResNetCache<T>> const &cache, Shape s, Aggregation a,
                               std::vector<Mat<T>> const &dout);

  ParamList<T> parameters();
  ConstParamList<T> parameters() const;

  static Index param_count(int blocks, int features);

private:
  Conv3x3<T> input_;
  std::vector<Conv3x3<T>> conv1_;
  std::vector<Conv3x3<T>> conv2_;
  Conv3x3<T> output_;
};

/// ResNet-based regularizer for the two non-recurrent unrolling strategies:
/// one copy reused at every iteration (weight sharing) or one copy per
/// iteration (cascade).
template <typename T>
class ResNetRegularizer
{
public:
  ResNetRegularizer() = default;
  ResNetRegularizer(int copies, int blocks, int features, Aggregation aggregation);

  int copies() const { return static_cast<int>(nets_.size()); }
  ResNet<T> &copy(int i) { return nets_.at(i); }
  ResNet<T> const &copy(int i) const { return nets_.at(i); }

  void begin(Index batch, Shape s);
  std::vector<Mat<T>> forward(int k, std::vector<Mat<T>> const &x, bool record);
  std::vector<Mat<T>> backward(int k, std::vector<Mat<T>> const &dz);

  ParamList<T> parameters();
  /// ReLU signs and max-pool winners of the recorded iterations.
  std::vector<std::int32_t> activation_pattern() const;
  /// Later forwards reuse these signs and winners (nullptr to release).
  void freeze(std::vector<std::int32_t> const *pattern) { frozen_ = pattern; }
  ConstParamList<T> parameters() const;

private:
  ResNet<T> &net_for(int k) { return nets_[nets_.size() == 1 ? 0 : k - 1]; }

  std::vector<ResNet<T>> nets_;
  Aggregation aggregation_ = Aggregation::max;
  Shape shape_;
  Index batch_ = 0;
  std::vector<std::vector<ResNetCache<T>>> cache_; // [k-1][rep]
  std::vector<std::int32_t> const *frozen_ = nullptr;
};

} // namespace pfr::net
