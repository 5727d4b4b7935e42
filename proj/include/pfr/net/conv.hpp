#pragma once

#include "tensor.hpp"

namespace pfr::net {

/// Unfolds 3x3 zero-padded neighbourhoods: (C, HW) -> (C * 9, HW).
template <typename T>
void im2col(Mat<T> const &in, Shape s, Mat<T> &col);

/// Adjoint of im2col, accumulated into `in` (which must already be sized).
template <typename T>
void col2im_add(Mat<T> const &col, Shape s, Mat<T> &in);

/// 3x3 convolution with zero padding 1 and a per-output-channel bias.
template <typename T>
class Conv3x3
{
public:
  Conv3x3() = default;
  Conv3x3(std::string const &name, Index in_channels, Index out_channels);

  Index in_channels() const { return in_; }
  Index out_channels() const { return out_; }

  void forward(Mat<T> const &in, Shape s, Mat<T> &out) const;
  /// Forward from an already unfolded input.
  void forward_col(Mat<T> const &col, Mat<T> &out) const;

  /// Accumulates weight/bias gradients. When `din` is non-null the input
  /// gradient is added to it.
  void backward(Mat<T> const &in, Shape s, Mat<T> const &dout, Mat<T> *din);
  /// Same, from the unfolded input; adds W^T dout into `dcol` when non-null.
  void backward_col(Mat<T> const &col, Mat<T> const &dout, Mat<T> *dcol);

  Param<T> weight;
  Param<T> bias;

private:
  Index in_ = 0;
  Index out_ = 0;
};

inline Index conv_param_count(Index in, Index out)
{
  return in * out * 9 + out;
}

} // namespace pfr::net
