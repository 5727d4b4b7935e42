#include "pfr/net/convgru.hpp"
#include "pfr/error.hpp"

#include <fmt/format.h>

namespace pfr::net {

namespace {

template <typename T>
Mat<T> stack(Mat<T> const &top, Mat<T> const &bottom)
{
  Mat<T> out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

template <typename T>
void sigmoid_inplace(Mat<T> &a)
{
  a = (T(1) / (T(1) + (-a.array()).exp())).matrix();
}

} // namespace

template <typename T>
ConvGruCell<T>::ConvGruCell(std::string const &name, Index in_channels, Index hidden_channels)
  : update(name + ".update", in_channels + hidden_channels, hidden_channels)
  , reset(name + ".reset", in_channels + hidden_channels, hidden_channels)
  , candidate(name + ".candidate", in_channels + hidden_channels, hidden_channels)
  , in_(in_channels)
  , hidden_(hidden_channels)
{
}

template <typename T>
Mat<T> ConvGruCell<T>::forward(Mat<T> const &x, Mat<T> const &hprev, Shape s, GruCache<T> *cache) const
{
  if (x.rows() != in_ || hprev.rows() != hidden_ || x.cols() != s.pixels() || hprev.cols() != s.pixels()) {
    throw ShapeMismatch(fmt::format("{}: expected ({}, {}) channels, got ({}, {})", update.weight.name, in_, hidden_,
                                    x.rows(), hprev.rows()));
  }
  Mat<T> col;
  im2col(stack(hprev, x), s, col);
  Mat<T> z, r;
  update.forward_col(col, z);
  reset.forward_col(col, r);
  sigmoid_inplace(z);
  sigmoid_inplace(r);

  Mat<T> const rh = r.cwiseProduct(hprev);
  im2col(stack(rh, x), s, col);
  Mat<T> c;
  candidate.forward_col(col, c);
  c = c.array().tanh().matrix();

  Mat<T> h = hprev + z.cwiseProduct(c - hprev);
  if (cache) {
    cache->x = x;
    cache->hprev = hprev;
    cache->update = std::move(z);
    cache->reset = std::move(r);
    cache->candidate = std::move(c);
    cache->h = h;
  }
  return h;
}

template <typename T>
void ConvGruCell<T>::backward(GruCache<T> const &cc, Shape s, Mat<T> const &dh, Mat<T> &dx, Mat<T> &dhprev)
{
  auto const &z = cc.update;
  auto const &r = cc.reset;
  auto const &c = cc.candidate;
  auto const &hp = cc.hprev;

  Mat<T> const dz = dh.cwiseProduct(c - hp);
  Mat<T> const dc = dh.cwiseProduct(z);
  dhprev = dh - dh.cwiseProduct(z);

  Mat<T> const dac = dc.array() * (T(1) - c.array().square());
  Mat<T> col;
  im2col(stack(Mat<T>(r.cwiseProduct(hp)), cc.x), s, col);
  Mat<T> dcol = Mat<T>::Zero(col.rows(), col.cols());
  candidate.backward_col(col, dac, &dcol);
  Mat<T> dcat = Mat<T>::Zero(hidden_ + in_, s.pixels());
  col2im_add(dcol, s, dcat);
  Mat<T> const drh = dcat.topRows(hidden_);
  dx = dcat.bottomRows(in_);
  Mat<T> const dr = drh.cwiseProduct(hp);
  dhprev += drh.cwiseProduct(r);

  Mat<T> const daz = dz.array() * z.array() * (T(1) - z.array());
  Mat<T> const dar = dr.array() * r.array() * (T(1) - r.array());
  im2col(stack(hp, cc.x), s, col);
  dcol.setZero(col.rows(), col.cols());
  update.backward_col(col, daz, &dcol);
  reset.backward_col(col, dar, &dcol);
  dcat.setZero();
  col2im_add(dcol, s, dcat);
  dhprev += dcat.topRows(hidden_);
  dx += dcat.bottomRows(in_);
}

template <typename T>
RecurrentRegularizer<T>::RecurrentRegularizer(int depth, int features, Aggregation aggregation)
  : aggregation_(aggregation)
  , aggregate_after_(depth / 2 - 1)
{
  if (depth < 2) { throw InvalidInput(fmt::format("recurrent stack needs at least 2 cells, got {}", depth)); }
  if (features < 1) { throw InvalidInput("feature count must be positive"); }
  for (int g = 0; g < depth; ++g) {
    Index const in = g == 0 ? 2 : features;
    Index const hidden = g == depth - 1 ? 2 : features;
    cells_.emplace_back(fmt::format("cell{}", g + 1), in, hidden);
  }
}

template <typename T>
Index RecurrentRegularizer<T>::param_count(int depth, int features)
{
  Index total = 0;
  for (int g = 0; g < depth; ++g) {
    total += ConvGruCell<T>::param_count(g == 0 ? 2 : features, g == depth - 1 ? 2 : features);
  }
  return total;
}

template <typename T>
void RecurrentRegularizer<T>::begin(Index batch, Shape s)
{
  batch_ = batch;
  shape_ = s;
  hidden_.assign(cells_.size(), {});
  for (std::size_t g = 0; g < cells_.size(); ++g) {
    hidden_[g].assign(batch, Mat<T>::Zero(cells_[g].hidden_channels(), s.pixels()));
  }
  cache_.clear();
  carry_.clear();
}

template <typename T>
std::vector<Mat<T>> RecurrentRegularizer<T>::forward(int k, std::vector<Mat<T>> const &x, bool record)
{
  if (static_cast<Index>(x.size()) != batch_) { throw ShapeMismatch("batch size changed since begin()"); }
  if (record && static_cast<int>(cache_.size()) != k - 1) { throw InvalidInput("recorded iterations out of order"); }
  std::vector<std::vector<GruCache<T>>> *step = nullptr;
  if (record) {
    cache_.emplace_back(cells_.size(), std::vector<GruCache<T>>(batch_));
    step = &cache_.back();
  }
  std::vector<Mat<T>> act = x;
  for (std::size_t g = 0; g < cells_.size(); ++g) {
    for (Index b = 0; b < batch_; ++b) {
      GruCache<T> *cc = step ? &(*step)[g][b] : nullptr;
      hidden_[g][b] = cells_[g].forward(act[b], hidden_[g][b], shape_, cc);
      act[b] = hidden_[g][b];
    }
    if (static_cast<int>(g) == aggregate_after_) {
      if (frozen_ && aggregation_ == Aggregation::max) {
        Index const step = cells_[g].hidden_channels() * shape_.pixels();
        if (static_cast<Index>(frozen_->size()) < k * step) { throw ShapeMismatch("frozen pattern is too short"); }
        aggregate_max_with(act, frozen_->data() + (k - 1) * step);
      } else {
        aggregate(act, aggregation_);
      }
    }
  }
  return act;
}

template <typename T>
std::vector<Mat<T>> RecurrentRegularizer<T>::backward(int k, std::vector<Mat<T>> const &dz)
{
  if (k < 1 || k > static_cast<int>(cache_.size())) { throw InvalidInput("backward iteration was not recorded"); }
  if (k == static_cast<int>(cache_.size())) {
    carry_.assign(cells_.size(), {});
    for (std::size_t g = 0; g < cells_.size(); ++g) {
      carry_[g].assign(batch_, Mat<T>::Zero(cells_[g].hidden_channels(), shape_.pixels()));
    }
  }
  auto const &step = cache_[k - 1];
  std::vector<Mat<T>> grad = dz;
  for (int g = static_cast<int>(cells_.size()) - 1; g >= 0; --g) {
    if (g == aggregate_after_) {
      std::vector<Mat<T>> pre(batch_);
      for (Index b = 0; b < batch_; ++b) {
        pre[b] = step[g][b].h;
      }
      aggregate_backward(pre, grad, aggregation_);
    }
    for (Index b = 0; b < batch_; ++b) {
      Mat<T> const dh = grad[b] + carry_[g][b];
      Mat<T> dx, dhprev;
      cells_[g].backward(step[g][b], shape_, dh, dx, dhprev);
      carry_[g][b] = std::move(dhprev);
      grad[b] = std::move(dx);
    }
  }
  return grad;
}

template <typename T>
std::vector<std::int32_t> RecurrentRegularizer<T>::activation_pattern() const
{
  std::vector<std::int32_t> out;
  if (aggregation_ != Aggregation::max) { return out; }
  for (auto const &step : cache_) {
    std::vector<Mat<T>> pre;
    for (auto const &c : step[aggregate_after_]) {
      pre.push_back(c.h);
    }
    append_max_winners(pre, out);
  }
  return out;
}

template <typename T>
ParamList<T> RecurrentRegularizer<T>::parameters()
{
  ParamList<T> out;
  for (auto &c : cells_) {
    for (auto *conv : {&c.update, &c.reset, &c.candidate}) {
      out.push_back(&conv->weight);
      out.push_back(&conv->bias);
    }
  }
  return out;
}

template <typename T>
ConstParamList<T> RecurrentRegularizer<T>::parameters() const
{
  ConstParamList<T> out;
  for (auto const &c : cells_) {
    for (auto const *conv : {&c.update, &c.reset, &c.candidate}) {
      out.push_back(&conv->weight);
      out.push_back(&conv->bias);
    }
  }
  return out;
}

template class ConvGruCell<float>;
template class ConvGruCell<double>;
template class RecurrentRegularizer<float>;
template class RecurrentRegularizer<double>;

} // namespace pfr::net
