#pragma once

#include "evaluate.hpp"

#include <filesystem>

namespace pfr {

/// 8-bit binary PGM; values are clipped to [0, 1] and scaled to 255.
void write_pgm(std::filesystem::path const &path, RGrid const &img);

/// Panels under out_dir/panels: for each (slice, method) a reconstruction,
/// a 5x magnified difference and a phase map (first repetition). Also
/// out_dir/metrics.csv and PSNR/SSIM boxplots.
void emit_figures(EvalReport const &report, std::vector<std::vector<ImageSet>> const &reconstructions,
                  std::vector<ImageSet> const &truths,
                  std::filesystem::path const &out_dir);

/// Boxplot raster of one column per method: whiskers at min/max, box at the
/// quartiles, a bright median line.
RGrid render_boxplot(std::vector<std::vector<double>> const &columns, Index height = 200, Index column_width = 40);

} // namespace pfr
