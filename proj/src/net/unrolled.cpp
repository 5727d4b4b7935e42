#include "pfr/net/unrolled.hpp"
#include "pfr/core/fft.hpp"
#include "pfr/error.hpp"

#include <cmath>
#include <fmt/format.h>
#include <map>

namespace pfr::net {

std::string to_string(Strategy s)
{
  switch (s) {
  case Strategy::recurrent: return "recurrent";
  case Strategy::weight_shared: return "weight_shared";
  case Strategy::cascaded: return "cascaded";
  }
  return "recurrent";
}

Strategy parse_strategy(std::string const &s)
{
  if (s == "recurrent") { return Strategy::recurrent; }
  if (s == "weight_shared") { return Strategy::weight_shared; }
  if (s == "cascaded") { return Strategy::cascaded; }
  throw InvalidInput("unknown unrolling strategy '" + s + "'");
}

NetworkConfig NetworkConfig::drpf(Aggregation a)
{
  NetworkConfig c;
  c.aggregation = a;
  return c;
}

NetworkConfig NetworkConfig::resnet(Strategy s)
{
  NetworkConfig c;
  c.strategy = s;
  c.depth = 6;
  c.features = 64;
  c.aggregation = Aggregation::max;
  return c;
}

Index count_params(NetworkConfig const &cfg)
{
  switch (cfg.strategy) {
  case Strategy::recurrent: return RecurrentRegularizer<float>::param_count(cfg.depth, cfg.features);
  case Strategy::weight_shared: return ResNet<float>::param_count(cfg.depth, cfg.features);
  case Strategy::cascaded: return cfg.iterations * ResNet<float>::param_count(cfg.depth, cfg.features);
  }
  return 0;
}

template <typename T>
Measurements<T> Measurements<T>::from(KSpaceSet const &set)
{
  validate_set(set);
  Measurements<T> m;
  m.shape = Shape{set.front().rows(), set.front().cols()};
  m.acquired = set.front().mask().acquired_count();
  for (auto const &k : set) {
    auto const &s = k.samples();
    std::vector<std::complex<T>> v(static_cast<std::size_t>(s.size()));
    for (Index i = 0; i < s.size(); ++i) {
      v[i] = std::complex<T>(static_cast<T>(s.data()[i].real()), static_cast<T>(s.data()[i].imag()));
    }
    m.samples.push_back(std::move(v));
  }
  return m;
}

template <typename T>
Mat<T> to_channels(CGrid const &img)
{
  Mat<T> out(2, img.size());
  for (Index i = 0; i < img.size(); ++i) {
    out(0, i) = static_cast<T>(img.data()[i].real());
    out(1, i) = static_cast<T>(img.data()[i].imag());
  }
  return out;
}

template <typename T>
CGrid from_channels(Mat<T> const &img, Shape s)
{
  CGrid out(s.height, s.width);
  for (Index i = 0; i < s.pixels(); ++i) {
    out.data()[i] = Complex(img(0, i), img(1, i));
  }
  return out;
}

namespace {

template <typename T>
std::vector<std::complex<T>> pack(Mat<T> const &img)
{
  std::vector<std::complex<T>> buf(static_cast<std::size_t>(img.cols()));
  for (Index i = 0; i < img.cols(); ++i) {
    buf[i] = std::complex<T>(img(0, i), img(1, i));
  }
  return buf;
}

template <typename T>
void unpack(std::vector<std::complex<T>> const &buf, Mat<T> &img)
{
  img.resize(2, static_cast<Index>(buf.size()));
  for (Index i = 0; i < img.cols(); ++i) {
    img(0, i) = buf[i].real();
    img(1, i) = buf[i].imag();
  }
}

template <typename T>
void fft(std::vector<std::complex<T>> &buf, Shape s, bool inverse)
{
  centered_fft2<T>(std::span(buf), s.height, s.width, inverse);
}

} // namespace

template <typename T>
void data_consistency_step(Mat<T> &img, std::vector<std::complex<T>> const &y, Shape s, Index acquired, double lambda)
{
  auto buf = pack(img);
  fft(buf, s, false);
  T const l = static_cast<T>(lambda);
  for (Index r = 0; r < s.height; ++r) {
    for (Index c = 0; c < acquired; ++c) {
      auto const i = static_cast<std::size_t>(r * s.width + c);
      buf[i] = lambda == 0.0 ? y[i] : (l * buf[i] + y[i]) / (T(1) + l);
    }
  }
  fft(buf, s, true);
  unpack(buf, img);
}

template <typename T>
void data_consistency_adjoint(Mat<T> &grad, Shape s, Index acquired, double lambda)
{
  auto buf = pack(grad);
  fft(buf, s, false);
  T const keep = static_cast<T>(lambda / (1.0 + lambda));
  for (Index r = 0; r < s.height; ++r) {
    for (Index c = 0; c < acquired; ++c) {
      buf[static_cast<std::size_t>(r * s.width + c)] *= keep;
    }
  }
  fft(buf, s, true);
  unpack(buf, grad);
}

template <typename T>
UnrolledNetwork<T>::UnrolledNetwork(NetworkConfig cfg)
  : cfg_(cfg)
{
  if (cfg_.iterations < 1) { throw InvalidInput(fmt::format("iterations must be >= 1, got {}", cfg_.iterations)); }
  if (!(cfg_.lambda >= 0.0)) { throw InvalidInput("lambda must be non-negative"); }
  switch (cfg_.strategy) {
  case Strategy::recurrent: reg_ = RecurrentRegularizer<T>(cfg_.depth, cfg_.features, cfg_.aggregation); break;
  case Strategy::weight_shared: reg_ = ResNetRegularizer<T>(1, cfg_.depth, cfg_.features, cfg_.aggregation); break;
  case Strategy::cascaded:
    reg_ = ResNetRegularizer<T>(cfg_.iterations, cfg_.depth, cfg_.features, cfg_.aggregation);
    break;
  }
}

template <typename T>
std::vector<Mat<T>> UnrolledNetwork<T>::forward(Measurements<T> const &y, bool record,
                                                std::vector<std::vector<Mat<T>>> *pre_dc)
{
  if (y.batch() < 1) { throw InvalidInput("empty repetition set"); }
  Shape const s = y.shape;
  std::vector<Mat<T>> x(y.batch());
  for (Index b = 0; b < y.batch(); ++b) {
    auto buf = y.samples[b];
    fft(buf, s, true);
    unpack(buf, x[b]);
  }
  std::visit([&](auto &r) { r.begin(y.batch(), s); }, reg_);
  if (pre_dc) { pre_dc->clear(); }
  for (int k = 1; k <= cfg_.iterations; ++k) {
    x = std::visit([&](auto &r) { return r.forward(k, x, record); }, reg_);
    if (pre_dc) { pre_dc->push_back(x); }
    for (Index b = 0; b < y.batch(); ++b) {
      data_consistency_step(x[b], y.samples[b], s, y.acquired, cfg_.lambda);
    }
  }
  y_ = record ? &y : nullptr;
  recorded_ = record ? cfg_.iterations : 0;
  return x;
}

template <typename T>
void UnrolledNetwork<T>::backward(std::vector<Mat<T>> const &dout)
{
  if (!y_ || recorded_ == 0) { throw InvalidInput("backward() needs a preceding recorded forward()"); }
  Shape const s = y_->shape;
  std::vector<Mat<T>> grad = dout;
  for (int k = cfg_.iterations; k >= 1; --k) {
    for (auto &g : grad) {
      data_consistency_adjoint(g, s, y_->acquired, cfg_.lambda);
    }
    grad = std::visit([&](auto &r) { return r.backward(k, grad); }, reg_);
  }
  recorded_ = 0;
  y_ = nullptr;
}

template <typename T>
std::vector<std::int32_t> UnrolledNetwork<T>::activation_pattern() const
{
  return std::visit([](auto const &r) { return r.activation_pattern(); }, reg_);
}

template <typename T>
void UnrolledNetwork<T>::freeze_activation_pattern(std::vector<std::int32_t> pattern)
{
  frozen_ = std::move(pattern);
  std::vector<std::int32_t> const *p = frozen_.empty() ? nullptr : &frozen_;
  std::visit([&](auto &r) { r.freeze(p); }, reg_);
}

template <typename T>
ImageSet UnrolledNetwork<T>::reconstruct(KSpaceSet const &y)
{
  auto const m = Measurements<T>::from(y);
  auto const out = forward(m, false);
  ImageSet images;
  for (auto const &o : out) {
    images.emplace_back(from_channels(o, m.shape));
  }
  return images;
}

template <typename T>
ParamList<T> UnrolledNetwork<T>::parameters()
{
  return std::visit([](auto &r) { return r.parameters(); }, reg_);
}

template <typename T>
ConstParamList<T> UnrolledNetwork<T>::parameters() const
{
  return std::visit([](auto const &r) { return r.parameters(); }, reg_);
}

template <typename T>
Index UnrolledNetwork<T>::parameter_count() const
{
  Index n = 0;
  for (auto const *p : parameters()) {
    n += p->size();
  }
  return n;
}

template <typename T>
void UnrolledNetwork<T>::zero_grad()
{
  for (auto *p : parameters()) {
    p->grad.setZero();
  }
}

template <typename T>
void UnrolledNetwork<T>::initialize_he(std::mt19937_64 &rng)
{
  for (auto *p : parameters()) {
    if (p->shape.size() == 4) {
      double const fan_in = static_cast<double>(p->shape[1] * p->shape[2] * p->shape[3]);
      std::normal_distribution<double> n(0.0, std::sqrt(2.0 / fan_in));
      for (Index i = 0; i < p->value.size(); ++i) {
        p->value.data()[i] = static_cast<T>(n(rng));
      }
    } else {
      p->value.setZero();
    }
  }
}

template <typename T>
void UnrolledNetwork<T>::set_zero()
{
  for (auto *p : parameters()) {
    p->value.setZero();
  }
}

template <typename T>
template <typename U>
void UnrolledNetwork<T>::load_values(ConstParamList<U> const &src)
{
  std::map<std::string, Param<U> const *> by_name;
  for (auto const *p : src) {
    by_name[p->name] = p;
  }
  for (auto *p : parameters()) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) { throw FormatError(fmt::format("parameter '{}' missing from source", p->name)); }
    if (it->second->shape != p->shape) { throw ShapeMismatch(fmt::format("parameter '{}' has a different shape", p->name)); }
    p->value = it->second->value.template cast<T>();
  }
}

template struct Measurements<float>;
template struct Measurements<double>;
template Mat<float> to_channels<float>(CGrid const &);
template Mat<double> to_channels<double>(CGrid const &);
template CGrid from_channels<float>(Mat<float> const &, Shape);
template CGrid from_channels<double>(Mat<double> const &, Shape);
template void data_consistency_step<float>(Mat<float> &, std::vector<std::complex<float>> const &, Shape, Index, double);
template void data_consistency_step<double>(Mat<double> &, std::vector<std::complex<double>> const &, Shape, Index,
                                            double);
template void data_consistency_adjoint<float>(Mat<float> &, Shape, Index, double);
template void data_consistency_adjoint<double>(Mat<double> &, Shape, Index, double);
template class UnrolledNetwork<float>;
template class UnrolledNetwork<double>;
template void UnrolledNetwork<float>::load_values<float>(ConstParamList<float> const &);
template void UnrolledNetwork<float>::load_values<double>(ConstParamList<double> const &);
template void UnrolledNetwork<double>::load_values<float>(ConstParamList<float> const &);
template void UnrolledNetwork<double>::load_values<double>(ConstParamList<double> const &);

} // namespace pfr::net
