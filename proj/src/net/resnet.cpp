#include "pfr/net/resnet.hpp"
#include "pfr/error.hpp"

#include <fmt/format.h>

namespace pfr::net {

namespace {
template <typename T>
Mat<T> relu(Mat<T> const &a)
{
  return a.cwiseMax(T(0));
}

template <typename T>
Mat<T> relu_grad(Mat<T> const &pre, Mat<T> const &g)
{
  return (pre.array() > T(0)).select(g, T(0));
}
} // namespace

template <typename T>
ResNet<T>::ResNet(std::string const &prefix, int blocks, int features)
  : input_(prefix + "input", 2, features)
  , output_(prefix + "output", features, 2)
{
  if (blocks < 2) { throw InvalidInput(fmt::format("ResNet needs at least 2 blocks, got {}", blocks)); }
  if (features < 1) { throw InvalidInput("feature count must be positive"); }
  for (int i = 0; i < blocks; ++i) {
    conv1_.emplace_back(fmt::format("{}block{}.conv1", prefix, i + 1), features, features);
    conv2_.emplace_back(fmt::format("{}block{}.conv2", prefix, i + 1), features, features);
  }
}

template <typename T>
Index ResNet<T>::param_count(int blocks, int features)
{
  return conv_param_count(2, features) + 2 * blocks * conv_param_count(features, features) +
         conv_param_count(features, 2);
}

template <typename T>
std::vector<Mat<T>> ResNet<T>::forward(std::vector<Mat<T>> const &x, Shape s, Aggregation a,
                                       std::vector<ResNetCache<T>> *cache, std::int32_t const *frozen) const
{
  Index const plane = input_.out_channels() * s.pixels();
  Index const per_rep = (1 + blocks()) * plane;
  auto act = [&](Mat<T> const &pre, std::size_t b, Index slot) {
    if (!frozen) { return relu(pre); }
    std::int32_t const *sign = frozen + static_cast<Index>(b) * per_rep + slot * plane;
    Mat<T> out = pre;
    for (Index i = 0; i < out.size(); ++i) {
      if (sign[i] == 0) { out.data()[i] = T(0); }
    }
    return out;
  };
  auto const batch = x.size();
  int const pool_after = blocks() / 2 - 1;
  if (cache) {
    cache->assign(batch, {});
    for (auto &c : *cache) {
      c.block_in.resize(conv1_.size());
      c.block_mid.resize(conv1_.size());
    }
  }
  std::vector<Mat<T>> f(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    Mat<T> pre;
    input_.forward(x[b], s, pre);
    f[b] = act(pre, b, 0);
    if (cache) {
      (*cache)[b].x = x[b];
      (*cache)[b].stem = std::move(pre);
    }
  }
  for (int i = 0; i < blocks(); ++i) {
    for (std::size_t b = 0; b < batch; ++b) {
      Mat<T> mid, res;
      conv1_[i].forward(f[b], s, mid);
      conv2_[i].forward(act(mid, b, 1 + i), s, res);
      if (cache) {
        (*cache)[b].block_in[i] = f[b];
        (*cache)[b].block_mid[i] = std::move(mid);
      }
      f[b] += res;
    }
    if (i == pool_after) {
      if (cache) {
        for (std::size_t b = 0; b < batch; ++b) {
          (*cache)[b].pooled = f[b];
        }
      }
      if (frozen && a == Aggregation::max) {
        aggregate_max_with(f, frozen + static_cast<Index>(batch) * per_rep);
      } else {
        aggregate(f, a);
      }
    }
  }
  std::vector<Mat<T>> out(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    output_.forward(f[b], s, out[b]);
    if (cache) { (*cache)[b].last = std::move(f[b]); }
  }
  return out;
}

template <typename T>
std::vector<Mat<T>> ResNet<T>::backward(std::vector<ResNetCache<T>> const &cache, Shape s, Aggregation a,
                                        std::vector<Mat<T>> const &dout)
{
  auto const batch = cache.size();
  int const pool_after = blocks() / 2 - 1;
  std::vector<Mat<T>> df(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    df[b] = Mat<T>::Zero(cache[b].last.rows(), cache[b].last.cols());
    output_.backward(cache[b].last, s, dout[b], &df[b]);
  }
  for (int i = blocks() - 1; i >= 0; --i) {
    if (i == pool_after) {
      std::vector<Mat<T>> pre(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        pre[b] = cache[b].pooled;
      }
      aggregate_backward(pre, df, a);
    }
    for (std::size_t b = 0; b < batch; ++b) {
      auto const &mid = cache[b].block_mid[i];
      Mat<T> dact = Mat<T>::Zero(mid.rows(), mid.cols());
      conv2_[i].backward(relu(mid), s, df[b], &dact);
      conv1_[i].backward(cache[b].block_in[i], s, relu_grad(mid, dact), &df[b]);
    }
  }
  std::vector<Mat<T>> dx(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    dx[b] = Mat<T>::Zero(cache[b].x.rows(), cache[b].x.cols());
    input_.backward(cache[b].x, s, relu_grad(cache[b].stem, df[b]), &dx[b]);
  }
  return dx;
}

template <typename T>
ParamList<T> ResNet<T>::parameters()
{
  ParamList<T> out{&input_.weight, &input_.bias};
  for (std::size_t i = 0; i < conv1_.size(); ++i) {
    out.insert(out.end(), {&conv1_[i].weight, &conv1_[i].bias, &conv2_[i].weight, &conv2_[i].bias});
  }
  out.insert(out.end(), {&output_.weight, &output_.bias});
  return out;
}

template <typename T>
ConstParamList<T> ResNet<T>::parameters() const
{
  ConstParamList<T> out{&input_.weight, &input_.bias};
  for (std::size_t i = 0; i < conv1_.size(); ++i) {
    out.insert(out.end(), {&conv1_[i].weight, &conv1_[i].bias, &conv2_[i].weight, &conv2_[i].bias});
  }
  out.insert(out.end(), {&output_.weight, &output_.bias});
  return out;
}

template <typename T>
ResNetRegularizer<T>::ResNetRegularizer(int copies, int blocks, int features, Aggregation aggregation)
  : aggregation_(aggregation)
{
  if (copies < 1) { throw InvalidInput("need at least one ResNet copy"); }
  for (int i = 0; i < copies; ++i) {
    std::string const prefix = copies == 1 ? std::string{} : fmt::format("iter{}.", i + 1);
    nets_.emplace_back(prefix, blocks, features);
  }
}

template <typename T>
void ResNetRegularizer<T>::begin(Index batch, Shape s)
{
  batch_ = batch;
  shape_ = s;
  cache_.clear();
}

template <typename T>
std::vector<Mat<T>> ResNetRegularizer<T>::forward(int k, std::vector<Mat<T>> const &x, bool record)
{
  if (static_cast<Index>(x.size()) != batch_) { throw ShapeMismatch("batch size changed since begin()"); }
  if (nets_.size() > 1 && k > static_cast<int>(nets_.size())) {
    throw InvalidInput(fmt::format("cascade has {} copies but iteration {} was requested", nets_.size(), k));
  }
  std::vector<ResNetCache<T>> *c = nullptr;
  if (record) {
    if (static_cast<int>(cache_.size()) != k - 1) { throw InvalidInput("recorded iterations out of order"); }
    c = &cache_.emplace_back();
  }
  std::int32_t const *frozen = nullptr;
  if (frozen_) {
    auto &n = net_for(k);
    Index const plane = n.features() * shape_.pixels();
    Index const step = batch_ * (1 + n.blocks()) * plane + (aggregation_ == Aggregation::max ? plane : 0);
    if (static_cast<Index>(frozen_->size()) < k * step) { throw ShapeMismatch("frozen pattern is too short"); }
    frozen = frozen_->data() + (k - 1) * step;
  }
  return net_for(k).forward(x, shape_, aggregation_, c, frozen);
}

template <typename T>
std::vector<Mat<T>> ResNetRegularizer<T>::backward(int k, std::vector<Mat<T>> const &dz)
{
  if (k < 1 || k > static_cast<int>(cache_.size())) { throw InvalidInput("backward iteration was not recorded"); }
  return net_for(k).backward(cache_[k - 1], shape_, aggregation_, dz);
}

template <typename T>
std::vector<std::int32_t> ResNetRegularizer<T>::activation_pattern() const
{
  std::vector<std::int32_t> out;
  auto signs = [&](Mat<T> const &m) {
    for (Index i = 0; i < m.size(); ++i) {
      out.push_back(m.data()[i] > T(0) ? 1 : 0);
    }
  };
  for (auto const &step : cache_) {
    std::vector<Mat<T>> pooled;
    for (auto const &c : step) {
      signs(c.stem);
      for (auto const &m : c.block_mid) {
        signs(m);
      }
      pooled.push_back(c.pooled);
    }
    if (aggregation_ == Aggregation::max) { append_max_winners(pooled, out); }
  }
  return out;
}

template <typename T>
ParamList<T> ResNetRegularizer<T>::parameters()
{
  ParamList<T> out;
  for (auto &n : nets_) {
    auto p = n.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

template <typename T>
ConstParamList<T> ResNetRegularizer<T>::parameters() const
{
  ConstParamList<T> out;
  for (auto const &n : nets_) {
    auto p = n.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

template class ResNet<float>;
template class ResNet<double>;
template class ResNetRegularizer<float>;
template class ResNetRegularizer<double>;

} // namespace pfr::net
