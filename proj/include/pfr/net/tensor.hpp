#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace pfr::net {

using Index = Eigen::Index;

/// Channels x pixels, each channel a contiguous row-major H*W plane.
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Shape
{
  Index height = 0;
  Index width = 0;
  Index pixels() const { return height * width; }
};

/// A named trainable tensor with its accumulated gradient. Convolution kernels
/// are stored as (C_out, C_in * 9), biases as (C_out, 1).
template <typename T>
struct Param
{
  std::string name;
  std::vector<Index> shape;
  Mat<T> value;
  Mat<T> grad;

  Param() = default;
  Param(std::string n, std::vector<Index> s, Index rows, Index cols)
    : name(std::move(n))
    , shape(std::move(s))
    , value(Mat<T>::Zero(rows, cols))
    , grad(Mat<T>::Zero(rows, cols))
  {
  }

  Index size() const { return value.size(); }
};

template <typename T>
using ParamList = std::vector<Param<T> *>;

template <typename T>
using ConstParamList = std::vector<Param<T> const *>;

} // namespace pfr::net
