#include "pfr/train/loss.hpp"
#include "pfr/error.hpp"

#include <cmath>

namespace pfr {

namespace {

constexpr double kSobelEps = 1e-8;
constexpr int kScales = 3;

void check_same(RGrid const &a, RGrid const &b)
{
  if (a.rows() != b.rows() || a.cols() != b.cols()) { throw ShapeMismatch("loss inputs differ in shape"); }
}

RGrid pool2(RGrid const &a)
{
  RGrid out(a.rows() / 2, a.cols() / 2);
  for (Index r = 0; r < out.rows(); ++r) {
    for (Index c = 0; c < out.cols(); ++c) {
      out(r, c) = 0.25 * (a(2 * r, 2 * c) + a(2 * r + 1, 2 * c) + a(2 * r, 2 * c + 1) + a(2 * r + 1, 2 * c + 1));
    }
  }
  return out;
}

RGrid pool2_adjoint(RGrid const &g, Index rows, Index cols)
{
  RGrid out = RGrid::Zero(rows, cols);
  for (Index r = 0; r < g.rows(); ++r) {
    for (Index c = 0; c < g.cols(); ++c) {
      double const v = 0.25 * g(r, c);
      out(2 * r, 2 * c) += v;
      out(2 * r + 1, 2 * c) += v;
      out(2 * r, 2 * c + 1) += v;
      out(2 * r + 1, 2 * c + 1) += v;
    }
  }
  return out;
}

// Sobel derivatives over the valid interior, scaled by 1/8.
void sobel(RGrid const &a, RGrid &gx, RGrid &gy)
{
  Index const rows = a.rows() - 2, cols = a.cols() - 2;
  gx.resize(rows, cols);
  gy.resize(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      gx(r, c) = (a(r, c + 2) + 2 * a(r + 1, c + 2) + a(r + 2, c + 2) - a(r, c) - 2 * a(r + 1, c) - a(r + 2, c)) / 8.0;
      gy(r, c) = (a(r + 2, c) + 2 * a(r + 2, c + 1) + a(r + 2, c + 2) - a(r, c) - 2 * a(r, c + 1) - a(r, c + 2)) / 8.0;
    }
  }
}

void sobel_adjoint(RGrid const &dgx, RGrid const &dgy, RGrid &da)
{
  for (Index r = 0; r < dgx.rows(); ++r) {
    for (Index c = 0; c < dgx.cols(); ++c) {
      double const x = dgx(r, c) / 8.0, y = dgy(r, c) / 8.0;
      da(r, c + 2) += x;
      da(r + 1, c + 2) += 2 * x;
      da(r + 2, c + 2) += x;
      da(r, c) -= x;
      da(r + 1, c) -= 2 * x;
      da(r + 2, c) -= x;
      da(r + 2, c) += y;
      da(r + 2, c + 1) += 2 * y;
      da(r + 2, c + 2) += y;
      da(r, c) -= y;
      da(r, c + 1) -= 2 * y;
      da(r, c + 2) -= y;
    }
  }
}

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

} // namespace

double l1_loss(RGrid const &pred, RGrid const &gt, RGrid *grad)
{
  check_same(pred, gt);
  RGrid const d = pred - gt;
  if (grad) { *grad = d.unaryExpr([](double x) { return sign(x); }) / static_cast<double>(d.size()); }
  return d.abs().mean();
}

double gradient_magnitude_loss(RGrid const &pred, RGrid const &gt, RGrid *grad)
{
  check_same(pred, gt);
  std::vector<RGrid> ps{pred}, gs{gt};
  for (int s = 1; s < kScales; ++s) {
    if (ps.back().rows() / 2 < 3 || ps.back().cols() / 2 < 3) { break; }
    ps.push_back(pool2(ps.back()));
    gs.push_back(pool2(gs.back()));
  }
  if (ps.front().rows() < 3 || ps.front().cols() < 3) { throw InvalidInput("image too small for a Sobel stencil"); }
  auto const used = static_cast<double>(ps.size());
  double total = 0;
  std::vector<RGrid> dscale(ps.size());
  for (std::size_t s = 0; s < ps.size(); ++s) {
    RGrid pgx, pgy, ggx, ggy;
    sobel(ps[s], pgx, pgy);
    sobel(gs[s], ggx, ggy);
    RGrid const pm = (pgx.square() + pgy.square() + kSobelEps).sqrt();
    RGrid const gm = (ggx.square() + ggy.square() + kSobelEps).sqrt();
    RGrid const d = pm - gm;
    double const n = static_cast<double>(d.size());
    total += d.abs().mean() / used;
    if (grad) {
      RGrid const dm = d.unaryExpr([](double x) { return sign(x); }) / (n * used);
      RGrid const dgx = dm * pgx / pm;
      RGrid const dgy = dm * pgy / pm;
      dscale[s] = RGrid::Zero(ps[s].rows(), ps[s].cols());
      sobel_adjoint(dgx, dgy, dscale[s]);
    }
  }
  if (grad) {
    for (std::size_t s = ps.size() - 1; s > 0; --s) {
      dscale[s - 1] += pool2_adjoint(dscale[s], ps[s - 1].rows(), ps[s - 1].cols());
    }
    *grad = dscale.front();
  }
  return total;
}

LossBreakdown loss(RGrid const &pred_avg, RGrid const &gt_avg, double w_perc, RGrid *grad)
{
  if (!(w_perc >= 0.0)) { throw InvalidInput("perceptual weight must be non-negative"); }
  LossBreakdown out;
  RGrid g1, g2;
  out.l1_term = l1_loss(pred_avg, gt_avg, grad ? &g1 : nullptr);
  out.perceptual_term = gradient_magnitude_loss(pred_avg, gt_avg, grad ? &g2 : nullptr);
  out.total = out.l1_term + w_perc * out.perceptual_term;
  if (grad) { *grad = g1 + w_perc * g2; }
  return out;
}

} // namespace pfr
