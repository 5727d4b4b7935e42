#include "pfr/net/conv.hpp"
#include "pfr/error.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace pfr::net {

template <typename T>
void im2col(Mat<T> const &in, Shape s, Mat<T> &col)
{
  Index const channels = in.rows();
  Index const h = s.height, w = s.width, n = s.pixels();
  col.resize(channels * 9, n);
  for (Index c = 0; c < channels; ++c) {
    T const *src = in.data() + c * n;
    for (Index ky = 0; ky < 3; ++ky) {
      for (Index kx = 0; kx < 3; ++kx) {
        T *dst = col.data() + (c * 9 + ky * 3 + kx) * n;
        Index const dy = ky - 1, dx = kx - 1;
        for (Index y = 0; y < h; ++y) {
          T *d = dst + y * w;
          Index const sy = y + dy;
          if (sy < 0 || sy >= h) {
            std::fill(d, d + w, T(0));
            continue;
          }
          T const *row = src + sy * w;
          if (dx == 0) {
            std::copy(row, row + w, d);
          } else if (dx < 0) {
            d[0] = T(0);
            std::copy(row, row + w - 1, d + 1);
          } else {
            std::copy(row + 1, row + w, d);
            d[w - 1] = T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(Mat<T> const &col, Shape s, Mat<T> &in)
{
  Index const channels = in.rows();
  Index const h = s.height, w = s.width, n = s.pixels();
  for (Index c = 0; c < channels; ++c) {
    T *dst = in.data() + c * n;
    for (Index ky = 0; ky < 3; ++ky) {
      for (Index kx = 0; kx < 3; ++kx) {
        T const *src = col.data() + (c * 9 + ky * 3 + kx) * n;
        Index const dy = ky - 1, dx = kx - 1;
        for (Index y = 0; y < h; ++y) {
          Index const sy = y + dy;
          if (sy < 0 || sy >= h) { continue; }
          T const *srow = src + y * w;
          T *drow = dst + sy * w;
          Index const x0 = std::max<Index>(0, -dx);
          Index const x1 = std::min<Index>(w, w - dx);
          for (Index x = x0; x < x1; ++x) {
            drow[x + dx] += srow[x];
          }
        }
      }
    }
  }
}

template <typename T>
Conv3x3<T>::Conv3x3(std::string const &name, Index in_channels, Index out_channels)
  : weight(name + ".weight", {out_channels, in_channels, 3, 3}, out_channels, in_channels * 9)
  , bias(name + ".bias", {out_channels}, out_channels, 1)
  , in_(in_channels)
  , out_(out_channels)
{
}

template <typename T>
void Conv3x3<T>::forward_col(Mat<T> const &col, Mat<T> &out) const
{
  out.noalias() = weight.value * col;
  out.colwise() += bias.value.col(0);
}

template <typename T>
void Conv3x3<T>::forward(Mat<T> const &in, Shape s, Mat<T> &out) const
{
  if (in.rows() != in_ || in.cols() != s.pixels()) {
    throw ShapeMismatch(fmt::format("{}: expected {} input channels, got {}", weight.name, in_, in.rows()));
  }
  Mat<T> col;
  im2col(in, s, col);
  forward_col(col, out);
}

template <typename T>
void Conv3x3<T>::backward_col(Mat<T> const &col, Mat<T> const &dout, Mat<T> *dcol)
{
  weight.grad.noalias() += dout * col.transpose();
  bias.grad.col(0) += dout.rowwise().sum();
  if (dcol) { dcol->noalias() += weight.value.transpose() * dout; }
}

template <typename T>
void Conv3x3<T>::backward(Mat<T> const &in, Shape s, Mat<T> const &dout, Mat<T> *din)
{
  Mat<T> col;
  im2col(in, s, col);
  if (din) {
    Mat<T> dcol = Mat<T>::Zero(col.rows(), col.cols());
    backward_col(col, dout, &dcol);
    col2im_add(dcol, s, *din);
  } else {
    backward_col(col, dout, nullptr);
  }
}

template void im2col<float>(Mat<float> const &, Shape, Mat<float> &);
template void im2col<double>(Mat<double> const &, Shape, Mat<double> &);
template void col2im_add<float>(Mat<float> const &, Shape, Mat<float> &);
template void col2im_add<double>(Mat<double> const &, Shape, Mat<double> &);
template class Conv3x3<float>;
template class Conv3x3<double>;

} // namespace pfr::net
