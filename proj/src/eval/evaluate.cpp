#include "pfr/eval/evaluate.hpp"
#include "pfr/classical.hpp"
#include "pfr/error.hpp"
#include "pfr/net/checkpoint.hpp"
#include "pfr/train/preprocess.hpp"
#include "pfr/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace pfr {

std::vector<std::string> const &known_methods()
{
  static std::vector<std::string> const m{"zero_fill", "pocs",      "homodyne",      "drpf_none",
                                          "drpf_mean", "drpf_max", "weight_shared", "cascaded"};
  return m;
}

bool is_learned_method(std::string const &method)
{
  return method.rfind("drpf_", 0) == 0 || method == "weight_shared" || method == "cascaded";
}

namespace {

std::size_t method_rank(std::string const &m)
{
  auto const &all = known_methods();
  auto const it = std::find(all.begin(), all.end(), m);
  if (it == all.end()) { throw InvalidInput(fmt::format("unknown method '{}'", m)); }
  return static_cast<std::size_t>(it - all.begin());
}

std::string format_metric(double v)
{
  if (std::isinf(v)) { return v > 0 ? "inf" : "-inf"; }
  if (std::isnan(v)) { return "nan"; }
  return fmt::format("{:.6f}", v);
}

} // namespace

ImageSet reconstruct_with(std::string const &method, KSpaceSet const &y, EvalOptions const &opt,
                          net::UnrolledNetwork<float> *network)
{
  validate_set(y);
  ImageSet out;
  if (is_learned_method(method)) {
    if (network == nullptr) { throw InvalidInput(fmt::format("method '{}' needs a checkpoint", method)); }
    return network->reconstruct(y);
  }
  method_rank(method);
  for (auto const &k : y) {
    if (method == "zero_fill") {
      out.push_back(zero_fill(k));
    } else if (method == "pocs") {
      out.push_back(pocs(k, opt.pocs_iterations, opt.apodize));
    } else {
      out.push_back(homodyne(k, opt.apodize));
    }
  }
  return out;
}

std::map<std::string, std::shared_ptr<net::UnrolledNetwork<float>>>
load_networks(std::vector<std::string> const &methods, EvalOptions const &opt)
{
  std::map<std::string, std::shared_ptr<net::UnrolledNetwork<float>>> nets;
  for (auto const &m : methods) {
    if (!is_learned_method(m)) { continue; }
    method_rank(m);
    auto const it = opt.checkpoints.find(m);
    if (it == opt.checkpoints.end()) { throw InvalidInput(fmt::format("no checkpoint given for method '{}'", m)); }
    net::Checkpoint meta;
    auto n = std::make_shared<net::UnrolledNetwork<float>>(net::load_checkpoint<float>(it->second, &meta));
    if (!(meta.pff == opt.pff)) {
      throw InvalidInput(fmt::format("checkpoint for '{}' was trained at pff {}, evaluating at {}", m, meta.pff.str(),
                                     opt.pff.str()));
    }
    nets[m] = std::move(n);
  }
  return nets;
}

EvalReport evaluate(Dataset const &data, std::vector<std::string> const &methods, EvalOptions const &opt,
                    std::vector<std::vector<ImageSet>> *reconstructions, std::vector<ImageSet> *truths)
{
  if (methods.empty()) { throw InvalidInput("no methods to evaluate"); }
  if (data.slices.empty()) { throw InvalidInput("dataset has no slices"); }
  if (data.presampled()) { throw InvalidInput("evaluation needs image-domain ground truth"); }
  std::vector<std::string> ordered = methods;
  std::sort(ordered.begin(), ordered.end(),
            [](auto const &a, auto const &b) { return method_rank(a) < method_rank(b); });
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());
  auto nets = load_networks(ordered, opt);

  EvalReport rep;
  if (reconstructions) { reconstructions->assign(data.slices.size(), {}); }
  if (truths) { truths->clear(); }
  for (std::size_t s = 0; s < data.slices.size(); ++s) {
    auto const prep = prepare_slice(data.images(s), opt.pff);
    RGrid const gt = magnitude_average(prep.truth);
    double const range = gt.maxCoeff();
    for (auto const &m : ordered) {
      auto const it = nets.find(m);
      ImageSet rec = reconstruct_with(m, prep.measured, opt, it == nets.end() ? nullptr : it->second.get());
      RGrid const pred = magnitude_average(rec);
      rep.records.push_back(EvalRecord{s, m, opt.pff, psnr(pred, gt, range), ssim(pred, gt, range)});
      if (reconstructions) { (*reconstructions)[s].push_back(std::move(rec)); }
    }
    if (truths) { truths->push_back(prep.truth); }
  }

  auto column = [&](std::string const &m, bool use_psnr) {
    std::vector<double> v;
    for (auto const &r : rep.records) {
      if (r.method == m) { v.push_back(use_psnr ? r.psnr : r.ssim); }
    }
    return v;
  };
  for (auto const &m : ordered) {
    auto const p = column(m, true);
    auto const q = column(m, false);
    rep.summaries.push_back(MethodSummary{m, summarize(p), summarize(q)});
  }
  for (std::size_t a = 0; a < ordered.size(); ++a) {
    for (std::size_t b = a + 1; b < ordered.size(); ++b) {
      auto const pa = column(ordered[a], true), pb = column(ordered[b], true);
      auto const sa = column(ordered[a], false), sb = column(ordered[b], false);
      rep.tests.push_back(
          PairedTest{ordered[a], ordered[b], wilcoxon_signed_rank(pa, pb), wilcoxon_signed_rank(sa, sb)});
    }
  }
  return rep;
}

std::string metrics_csv(std::vector<EvalRecord> const &records)
{
  std::string out = "slice,method,pff,psnr_db,ssim\n";
  for (auto const &r : records) {
    out += fmt::format("{},{},{},{},{}\n", r.slice, r.method, r.pff.str(), format_metric(r.psnr), format_metric(r.ssim));
  }
  return out;
}

std::string summary_text(EvalReport const &report)
{
  std::string out = fmt::format("{:<14} {:>4} {:>16} {:>26} {:>16}\n", "method", "n", "psnr mean+-std",
                                "psnr median [q1, q3]", "ssim mean+-std");
  for (auto const &s : report.summaries) {
    out += fmt::format("{:<14} {:>4} {:>7.3f} +- {:<6.3f} {:>8.3f} [{:.3f}, {:.3f}] {:>7.4f} +- {:<6.4f}\n", s.method,
                       s.psnr.count, s.psnr.mean, s.psnr.stddev, s.psnr.median, s.psnr.q1, s.psnr.q3, s.ssim.mean,
                       s.ssim.stddev);
  }
  if (!report.tests.empty()) {
    out += "wilcoxon signed-rank (two-sided, exact); * marks p < 0.05\n";
    for (auto const &t : report.tests) {
      out += fmt::format("  {} vs {}: psnr p = {:.4g}{} ssim p = {:.4g}{}\n", t.first, t.second, t.psnr.p_value,
                         t.psnr.p_value < 0.05 ? "*" : "", t.ssim.p_value, t.ssim.p_value < 0.05 ? "*" : "");
    }
  }
  return out;
}

} // namespace pfr
