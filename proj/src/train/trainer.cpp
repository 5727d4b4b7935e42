#include "pfr/train/trainer.hpp"
#include "pfr/core/model.hpp"
#include "pfr/error.hpp"
#include "pfr/eval/metrics.hpp"
#include "pfr/net/checkpoint.hpp"
#include "pfr/synth.hpp"
#include "pfr/train/adam.hpp"
#include "pfr/train/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>

namespace pfr {

using nlohmann::json;

void TrainConfig::validate() const
{
  if (pff.full() || pff.value() <= 0.5 || pff.value() > 1.0) {
    throw UnsupportedFactor(fmt::format("training needs a partial Fourier factor in (1/2, 1), got {}", pff.str()));
  }
  if (epochs < 0) { throw InvalidInput("epochs must be non-negative"); }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) { throw InvalidInput("learning_rate must be >= 0"); }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidInput("adam betas must lie in [0, 1)");
  }
  if (!(loss_perceptual_weight >= 0.0)) { throw InvalidInput("loss_perceptual_weight must be >= 0"); }
  if (!(repetition_fraction > 0.0 && repetition_fraction <= 1.0)) {
    throw InvalidInput("repetition_fraction must lie in (0, 1]");
  }
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) { throw InvalidInput("flip_probability must lie in [0, 1]"); }
  if (validation_slices < 0) { throw InvalidInput("validation_slices must be non-negative"); }
  auto const &n = network;
  if (n.iterations < 1 || n.depth < 2 || n.features < 1) { throw InvalidInput("network needs K >= 1, G >= 2, F >= 1"); }
  if (!(n.lambda >= 0.0)) { throw InvalidInput("lambda must be non-negative"); }
}

TrainConfig TrainConfig::from_json(json const &j)
{
  if (!j.is_object()) { throw FormatError("training config must be a JSON object"); }
  TrainConfig c;
  try {
    if (j.contains("pff")) {
      c.pff = j["pff"].is_string() ? PfFactor::parse(j["pff"].get<std::string>())
                                   : PfFactor::from_double(j["pff"].get<double>());
    }
    if (j.contains("strategy")) { c.network.strategy = net::parse_strategy(j["strategy"].get<std::string>()); }
    if (j.contains("aggregation")) { c.network.aggregation = net::parse_aggregation(j["aggregation"].get<std::string>()); }
    c.network.iterations = j.value("iterations", c.network.iterations);
    c.network.depth = j.value("depth", c.network.depth);
    c.network.features = j.value("features", c.network.features);
    c.network.lambda = j.value("lambda", c.network.lambda);
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    if (j.contains("adam_betas")) {
      auto const b = j["adam_betas"].get<std::vector<double>>();
      if (b.size() != 2) { throw FormatError("adam_betas needs two values"); }
      c.beta1 = b[0];
      c.beta2 = b[1];
    }
    c.loss_perceptual_weight = j.value("loss_perceptual_weight", c.loss_perceptual_weight);
    c.repetition_fraction = j.value("repetition_fraction", c.repetition_fraction);
    c.flip_probability = j.value("flip_probability", c.flip_probability);
    c.seed = j.value("seed", c.seed);
    c.validation_slices = j.value("validation_slices", c.validation_slices);
    c.init_checkpoint = j.value("init_checkpoint", c.init_checkpoint);
  } catch (json::exception const &e) {
    throw FormatError(fmt::format("bad training config: {}", e.what()));
  }
  c.validate();
  return c;
}

json TrainConfig::to_json() const
{
  return json{{"pff", pff.str()},
              {"strategy", net::to_string(network.strategy)},
              {"aggregation", net::to_string(network.aggregation)},
              {"iterations", network.iterations},
              {"depth", network.depth},
              {"features", network.features},
              {"lambda", network.lambda},
              {"epochs", epochs},
              {"learning_rate", learning_rate},
              {"adam_betas", {beta1, beta2}},
              {"loss_perceptual_weight", loss_perceptual_weight},
              {"repetition_fraction", repetition_fraction},
              {"flip_probability", flip_probability},
              {"seed", seed},
              {"validation_slices", validation_slices},
              {"init_checkpoint", init_checkpoint}};
}

TrainConfig TrainConfig::load(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in) { throw IoError(fmt::format("cannot open config '{}'", path.string())); }
  json j;
  try {
    j = json::parse(in);
  } catch (json::exception const &e) {
    throw FormatError(fmt::format("config '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return from_json(j);
}

std::string to_json_line(LogRecord const &r)
{
  json j{{"epoch", r.epoch}, {"step", r.step}, {"l1", r.l1}, {"perceptual", r.perceptual}, {"total", r.total}};
  // JSON has no NaN or infinity.
  j["val_psnr"] = std::isfinite(r.val_psnr) ? json(r.val_psnr) : json(nullptr);
  return j.dump();
}

PreparedSlice prepare_slice(ImageSet const &reps, PfFactor pff)
{
  PreparedSlice out;
  out.truth = normalize_set(reps).images;
  auto const mask = make_pf_mask(out.truth.front().cols(), pff);
  out.measured.reserve(out.truth.size());
  for (auto const &img : out.truth) {
    out.measured.push_back(forward(img, mask));
  }
  return out;
}

namespace {

using FloatNet = net::UnrolledNetwork<float>;

RGrid average_of(std::vector<net::Mat<float>> const &xs, net::Shape s)
{
  std::vector<CGrid> grids;
  grids.reserve(xs.size());
  for (auto const &x : xs) {
    grids.push_back(net::from_channels(x, s));
  }
  return magnitude_average(grids);
}

// dL/dx_b from dL/d(mean_b |x_b|).
std::vector<net::Mat<float>> magnitude_average_backward(std::vector<net::Mat<float>> const &xs, RGrid const &g)
{
  double const inv_b = 1.0 / static_cast<double>(xs.size());
  std::vector<net::Mat<float>> out;
  out.reserve(xs.size());
  for (auto const &x : xs) {
    net::Mat<float> d(2, x.cols());
    for (Index i = 0; i < x.cols(); ++i) {
      double const re = x(0, i), im = x(1, i);
      double const mag = std::hypot(re, im);
      double const s = mag > 0.0 ? g.data()[i] * inv_b / mag : 0.0;
      d(0, i) = static_cast<float>(s * re);
      d(1, i) = static_cast<float>(s * im);
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<net::Mat<float>> snapshot(FloatNet const &n)
{
  std::vector<net::Mat<float>> v;
  for (auto const *p : n.parameters()) {
    v.push_back(p->value);
  }
  return v;
}

void restore(FloatNet &n, std::vector<net::Mat<float>> const &v)
{
  auto ps = n.parameters();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ps[i]->value = v[i];
  }
}

std::string strip_iteration_prefix(std::string const &name)
{
  if (name.rfind("iter", 0) != 0) { return name; }
  auto const dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(dot + 1);
}

} // namespace

double validation_psnr(FloatNet &network, Dataset const &data, PfFactor pff)
{
  if (data.slices.empty()) { return std::numeric_limits<double>::quiet_NaN(); }
  double sum = 0;
  for (std::size_t i = 0; i < data.slices.size(); ++i) {
    auto const prep = prepare_slice(data.images(i), pff);
    auto const y = net::Measurements<float>::from(prep.measured);
    auto const out = network.forward(y);
    RGrid const pred = average_of(out, y.shape);
    RGrid const gt = magnitude_average(prep.truth);
    sum += psnr(pred, gt);
  }
  return sum / static_cast<double>(data.slices.size());
}

void replicate_base(FloatNet const &base, FloatNet &target)
{
  std::map<std::string, net::Param<float> const *> by_name;
  for (auto const *p : base.parameters()) {
    by_name[strip_iteration_prefix(p->name)] = p;
  }
  for (auto *p : target.parameters()) {
    auto const it = by_name.find(strip_iteration_prefix(p->name));
    if (it == by_name.end()) { throw ShapeMismatch(fmt::format("base network has no tensor for '{}'", p->name)); }
    if (it->second->shape != p->shape) { throw ShapeMismatch(fmt::format("tensor '{}' differs in shape", p->name)); }
    p->value = it->second->value;
  }
}

TrainResult train(Dataset const &data, TrainConfig const &cfg, Dataset const *validation, FloatNet const *init,
                  LogSink const &sink)
{
  cfg.validate();
  if (data.slices.empty()) { throw InvalidInput("training dataset is empty"); }
  if (data.presampled()) { throw InvalidInput("training needs image-domain ground truth, not PF-sampled k-space"); }
  if (data.height < 32 || data.width < 32) { throw InvalidInput("training slices must be at least 32x32"); }

  Dataset train_part = data;
  Dataset held_out;
  if (validation == nullptr && cfg.validation_slices > 0) {
    auto const n_val = static_cast<std::size_t>(cfg.validation_slices);
    if (n_val >= data.slices.size()) { throw InvalidInput("validation_slices leaves no training data"); }
    held_out = data;
    held_out.slices.assign(data.slices.end() - static_cast<std::ptrdiff_t>(n_val), data.slices.end());
    train_part.slices.resize(data.slices.size() - n_val);
    validation = &held_out;
  }

  TrainResult result{FloatNet(cfg.network), {}, std::numeric_limits<double>::quiet_NaN(), 0};
  FloatNet &network = result.network;
  if (init != nullptr) {
    replicate_base(*init, network);
  } else {
    std::mt19937_64 init_rng(slice_seed(cfg.seed, 0xC0FFEEULL));
    network.initialize_he(init_rng);
  }

  Adam<float> opt(cfg.learning_rate, cfg.beta1, cfg.beta2);
  auto const params = network.parameters();
  auto const mask = make_pf_mask(data.width, cfg.pff);
  std::vector<std::size_t> order(train_part.slices.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<net::Mat<float>> best = snapshot(network);
  long step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(slice_seed(cfg.seed ^ 0x5EEDF00DULL, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    LossBreakdown acc;
    for (std::size_t idx : order) {
      std::mt19937_64 rng(slice_seed(cfg.seed, static_cast<std::uint64_t>(step)));
      ImageSet reps = sample_repetition_subset(train_part.images(idx), cfg.repetition_fraction, rng);
      reps = normalize_set(reps).images;
      reps = augment(reps, cfg.flip_probability, rng);
      KSpaceSet y_set;
      for (auto const &img : reps) {
        y_set.push_back(forward(img, mask));
      }
      auto const y = net::Measurements<float>::from(y_set);

      network.zero_grad();
      auto const out = network.forward(y, true);
      RGrid const pred = average_of(out, y.shape);
      RGrid const gt = magnitude_average(reps);
      RGrid g;
      LossBreakdown const l = loss(pred, gt, cfg.loss_perceptual_weight, &g);
      if (!std::isfinite(l.total)) {
        throw NumericalError(fmt::format("non-finite loss at epoch {} step {} (l1 {}, perceptual {})", epoch, step,
                                         l.l1_term, l.perceptual_term));
      }
      network.backward(magnitude_average_backward(out, g));
      opt.step(params);
      acc.l1_term += l.l1_term;
      acc.perceptual_term += l.perceptual_term;
      acc.total += l.total;
      ++step;
    }
    double const n = static_cast<double>(order.size());
    LogRecord rec{epoch, step, acc.l1_term / n, acc.perceptual_term / n, acc.total / n,
                  std::numeric_limits<double>::quiet_NaN()};
    if (validation != nullptr) { rec.val_psnr = validation_psnr(network, *validation, cfg.pff); }
    bool const improved = validation == nullptr || std::isnan(result.best_val_psnr) || rec.val_psnr > result.best_val_psnr;
    if (improved) {
      result.best_val_psnr = rec.val_psnr;
      result.best_epoch = epoch;
      best = snapshot(network);
    }
    result.log.push_back(rec);
    if (sink) { sink(rec); }
  }
  restore(network, best);
  return result;
}

} // namespace pfr
