#include "pfr/eval/metrics.hpp"
#include "pfr/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fmt/format.h>
#include <numeric>

namespace pfr {

namespace {
void check_same(RGrid const &a, RGrid const &b)
{
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch(fmt::format("images differ in shape: {}x{} vs {}x{}", a.rows(), a.cols(), b.rows(), b.cols()));
  }
}

double resolve_range(RGrid const &gt, double data_range)
{
  double const r = data_range > 0.0 ? data_range : gt.maxCoeff();
  if (!(r > 0.0)) { throw InvalidInput("data range must be positive"); }
  return r;
}
} // namespace

double psnr(RGrid const &pred, RGrid const &gt, double data_range)
{
  check_same(pred, gt);
  double const mse = (pred - gt).square().mean();
  double const r = resolve_range(gt, data_range);
  double const floor = kIdentityTolerance * std::numeric_limits<double>::epsilon() * r;
  if (mse <= floor * floor) { return kInfinitePsnr; }
  return 10.0 * std::log10(r * r / mse);
}

namespace {
// Separable 'valid' filtering with a normalized 1-D Gaussian.
RGrid filter_valid(RGrid const &img, Eigen::ArrayXd const &k)
{
  Index const n = k.size();
  Index const rows = img.rows() - n + 1, cols = img.cols() - n + 1;
  RGrid tmp = RGrid::Zero(img.rows(), cols);
  for (Index r = 0; r < img.rows(); ++r) {
    for (Index c = 0; c < cols; ++c) {
      double s = 0;
      for (Index i = 0; i < n; ++i) {
        s += k(i) * img(r, c + i);
      }
      tmp(r, c) = s;
    }
  }
  RGrid out = RGrid::Zero(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      double s = 0;
      for (Index i = 0; i < n; ++i) {
        s += k(i) * tmp(r + i, c);
      }
      out(r, c) = s;
    }
  }
  return out;
}
} // namespace

double ssim(RGrid const &pred, RGrid const &gt, double data_range, SsimParams const &p)
{
  check_same(pred, gt);
  if (pred.rows() < p.window || pred.cols() < p.window) {
    throw InvalidInput(fmt::format("image {}x{} is smaller than the {}x{} SSIM window", pred.rows(), pred.cols(),
                                   p.window, p.window));
  }
  double const range = resolve_range(gt, data_range);
  Eigen::ArrayXd k(p.window);
  double const half = (p.window - 1) / 2.0;
  for (int i = 0; i < p.window; ++i) {
    k(i) = std::exp(-(i - half) * (i - half) / (2.0 * p.sigma * p.sigma));
  }
  k /= k.sum();
  double const c1 = (p.k1 * range) * (p.k1 * range);
  double const c2 = (p.k2 * range) * (p.k2 * range);
  RGrid const mx = filter_valid(pred, k);
  RGrid const my = filter_valid(gt, k);
  RGrid const sxx = filter_valid(pred * pred, k) - mx * mx;
  RGrid const syy = filter_valid(gt * gt, k) - my * my;
  RGrid const sxy = filter_valid(pred * gt, k) - mx * my;
  RGrid const map = ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
  return map.mean();
}

double percentile(std::vector<double> values, double pct)
{
  if (values.empty()) { throw InvalidInput("percentile of an empty sample"); }
  std::sort(values.begin(), values.end());
  double const pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  auto const lo = static_cast<std::size_t>(std::floor(pos));
  auto const hi = std::min(lo + 1, values.size() - 1);
  double const t = pos - static_cast<double>(lo);
  return values[lo] + t * (values[hi] - values[lo]);
}

Summary summarize(std::span<double const> values)
{
  Summary s;
  s.count = values.size();
  if (values.empty()) { return s; }
  std::vector<double> v(values.begin(), values.end());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) {
      ss += (x - s.mean) * (x - s.mean);
    }
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  s.median = percentile(v, 50);
  s.q1 = percentile(v, 25);
  s.q3 = percentile(v, 75);
  return s;
}

WilcoxonResult wilcoxon_signed_rank(std::span<double const> a, std::span<double const> b)
{
  if (a.size() != b.size()) { throw ShapeMismatch("paired samples differ in length"); }
  struct D
  {
    double mag;
    bool positive;
  };
  std::vector<D> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double const diff = a[i] - b[i];
    if (diff != 0.0 && std::isfinite(diff)) { d.push_back({std::abs(diff), diff > 0}); }
  }
  WilcoxonResult res;
  res.n = d.size();
  if (d.empty()) { return res; }
  std::sort(d.begin(), d.end(), [](D const &x, D const &y) { return x.mag < y.mag; });
  // Doubled average ranks are integers.
  std::vector<long> rank2(d.size());
  for (std::size_t i = 0; i < d.size();) {
    std::size_t j = i;
    while (j + 1 < d.size() && d[j + 1].mag == d[i].mag) {
      ++j;
    }
    long const r2 = static_cast<long>(i + 1 + j + 1); // 2 * mean of ranks i+1..j+1
    for (std::size_t t = i; t <= j; ++t) {
      rank2[t] = r2;
    }
    i = j + 1;
  }
  long const total = std::accumulate(rank2.begin(), rank2.end(), 0L);
  long w2 = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].positive) { w2 += rank2[i]; }
  }
  std::vector<double> dist(static_cast<std::size_t>(total) + 1, 0.0);
  dist[0] = 1.0;
  long reach = 0;
  for (long r : rank2) {
    reach += r;
    for (long s = reach; s >= 0; --s) {
      double const without = dist[s] * 0.5;
      double const with = s >= r ? dist[s - r] * 0.5 : 0.0;
      dist[s] = without + with;
    }
  }
  double lower = 0, upper = 0;
  for (long s = 0; s <= total; ++s) {
    if (s <= w2) { lower += dist[s]; }
    if (s >= w2) { upper += dist[s]; }
  }
  res.statistic = static_cast<double>(w2) / 2.0;
  res.p_value = std::min(1.0, 2.0 * std::min(lower, upper));
  return res;
}

} // namespace pfr
