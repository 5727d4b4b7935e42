#pragma once

#include "../core/types.hpp"

#include <limits>
#include <span>

namespace pfr {

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// RMS errors up to this many ulps of the data range count as identical:
/// an FFT round trip alone leaves about one.
inline constexpr double kIdentityTolerance = 16.0;

/// 10 log10(range^2 / MSE). A non-positive `data_range` selects max(gt).
/// Images identical to rounding (see kIdentityTolerance) give +infinity.
double psnr(RGrid const &pred, RGrid const &gt, double data_range = 0.0);

/// Gaussian-window SSIM constants.
struct SsimParams
{
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean of the local SSIM map over all full windows ("valid" region).
double ssim(RGrid const &pred, RGrid const &gt, double data_range = 0.0, SsimParams const &p = {});

struct Summary
{
  double mean = 0;
  double stddev = 0; // sample standard deviation
  double median = 0;
  double q1 = 0;
  double q3 = 0;
  std::size_t count = 0;
};

/// Quartiles use linear interpolation between order statistics.
Summary summarize(std::span<double const> values);
double percentile(std::vector<double> values, double pct);

struct WilcoxonResult
{
  double statistic = 0; // W+ (sum of positive ranks)
  std::size_t n = 0;    // pairs with non-zero difference
  double p_value = 1;   // two-sided, exact
};

/// Wilcoxon signed-rank test on paired samples. Zero differences are dropped
/// and tied magnitudes get average ranks; the null distribution is enumerated
/// exactly over the (doubled, hence integral) ranks.
WilcoxonResult wilcoxon_signed_rank(std::span<double const> a, std::span<double const> b);

} // namespace pfr
