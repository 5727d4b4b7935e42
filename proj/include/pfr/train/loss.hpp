#pragma once

#include "../core/types.hpp"

namespace pfr {

struct LossBreakdown
{
  double l1_term = 0;
  double perceptual_term = 0;
  double total = 0;
};

/// Mean absolute difference. Writes dL/dpred into `grad` when given.
double l1_loss(RGrid const &pred, RGrid const &gt, RGrid *grad = nullptr);

/// Multi-scale gradient-magnitude distance: L1 between normalized Sobel
/// magnitude maps at scales 1, 1/2 and 1/4 (2x2 average pooling), averaged
/// over the scales large enough for a 3x3 stencil. Penalizes lost edge
/// sharpness more than pixel-wise L1 does.
double gradient_magnitude_loss(RGrid const &pred, RGrid const &gt, RGrid *grad = nullptr);

/// total = L1 + w_perc * perceptual, on magnitude averages.
LossBreakdown loss(RGrid const &pred_avg, RGrid const &gt_avg, double w_perc, RGrid *grad = nullptr);

} // namespace pfr
