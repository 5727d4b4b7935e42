#pragma once

#include "../dataset.hpp"
#include "../net/unrolled.hpp"
#include "metrics.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>

namespace pfr {

/// Known reconstruction methods, in reporting order.
std::vector<std::string> const &known_methods();
bool is_learned_method(std::string const &method);

struct EvalRecord
{
  std::size_t slice = 0;
  std::string method;
  PfFactor pff;
  double psnr = 0; // +inf for identical images
  double ssim = 0;
};

struct MethodSummary
{
  std::string method;
  Summary psnr;
  Summary ssim;
};

struct PairedTest
{
  std::string first;
  std::string second;
  WilcoxonResult psnr;
  WilcoxonResult ssim;
};

struct EvalReport
{
  std::vector<EvalRecord> records; // sorted by (slice, method order)
  std::vector<MethodSummary> summaries;
  std::vector<PairedTest> tests; // every unordered method pair
};

struct EvalOptions
{
  PfFactor pff{5, 8};
  int pocs_iterations = 5;
  bool apodize = true;
  /// Checkpoint per learned method name (drpf_max, cascaded, ...).
  std::map<std::string, std::filesystem::path> checkpoints;
};

/// Reconstructs PF measurements with one method. Learned methods need `network`.
ImageSet reconstruct_with(std::string const &method, KSpaceSet const &y, EvalOptions const &opt,
                          net::UnrolledNetwork<float> *network = nullptr);

/// Loads the checkpoints of all learned methods in `methods`.
std::map<std::string, std::shared_ptr<net::UnrolledNetwork<float>>>
load_networks(std::vector<std::string> const &methods, EvalOptions const &opt);

/// Per-slice, per-method PSNR and SSIM of magnitude averages against the
/// ground-truth magnitude average, data range = per-slice ground-truth max.
/// Image-domain datasets are normalized and PF-sampled at `opt.pff` first.
/// `reconstructions`, when given, receives [slice][method] outputs together
/// with the normalized ground truth in `truths`.
EvalReport evaluate(Dataset const &data, std::vector<std::string> const &methods, EvalOptions const &opt,
                    std::vector<std::vector<ImageSet>> *reconstructions = nullptr,
                    std::vector<ImageSet> *truths = nullptr);

/// `slice,method,pff,psnr_db,ssim`, one row per record.
std::string metrics_csv(std::vector<EvalRecord> const &records);
/// Human-readable mean/std/median/IQR table plus pairwise p-values.
std::string summary_text(EvalReport const &report);

} // namespace pfr
