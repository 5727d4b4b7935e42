#include "pfr/core/fft.hpp"
#include "pfr/core/model.hpp"
#include "pfr/error.hpp"
#include "pfr/eval/metrics.hpp"
#include "pfr/synth.hpp"
#include "pfr/train/adam.hpp"
#include "pfr/train/loss.hpp"
#include "pfr/train/preprocess.hpp"
#include "pfr/train/trainer.hpp"
#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>

using namespace pfr;
using Catch::Approx;

namespace {

ImageSet random_set(Index rows, Index cols, Index b, std::mt19937_64 &rng)
{
  ImageSet s;
  for (Index i = 0; i < b; ++i) {
    s.emplace_back(test::random_complex(rows, cols, rng));
  }
  return s;
}

// Reference percentile: linear interpolation between order statistics.
double pooled_p98(ImageSet const &s)
{
  std::vector<double> m;
  for (auto const &img : s) {
    for (Index i = 0; i < img.data().size(); ++i) {
      m.push_back(std::abs(img.data().data()[i]));
    }
  }
  std::sort(m.begin(), m.end());
  double const pos = 0.98 * static_cast<double>(m.size() - 1);
  auto const lo = static_cast<std::size_t>(std::floor(pos));
  double const t = pos - static_cast<double>(lo);
  return lo + 1 < m.size() ? m[lo] * (1 - t) + m[lo + 1] * t : m[lo];
}

bool same_bits(ImageSet const &a, ImageSet const &b)
{
  if (a.size() != b.size()) { return false; }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].data() == b[i].data()).all()) { return false; }
  }
  return true;
}

Dataset small_dataset(std::size_t slices, std::uint64_t seed, Index size = 32, int reps = 3)
{
  PhantomSpec spec;
  spec.height = size;
  spec.width = size;
  spec.n_repetitions = reps;
  spec.n_ellipses = 3;
  spec.patch_min_freq = 3;
  spec.patch_max_freq = 5;
  spec.seed = seed;
  return generate_dataset(spec, slices);
}

TrainConfig small_config()
{
  TrainConfig c;
  c.network.strategy = net::Strategy::recurrent;
  c.network.iterations = 2;
  c.network.depth = 2;
  c.network.features = 4;
  c.epochs = 2;
  c.seed = 5;
  return c;
}

RGrid box_blur(RGrid const &x)
{
  RGrid out = x;
  for (Index r = 1; r + 1 < x.rows(); ++r) {
    for (Index c = 1; c + 1 < x.cols(); ++c) {
      out(r, c) = x.block(r - 1, c - 1, 3, 3).mean();
    }
  }
  return out;
}

} // namespace

TEST_CASE("normalize_set scales the pooled 98th percentile to one", "[train][preprocess]")
{
  std::mt19937_64 rng(1);
  auto const s = random_set(12, 10, 3, rng);
  double const p98 = pooled_p98(s);
  auto const n = normalize_set(s);
  CHECK(n.scale == Approx(p98).epsilon(1e-12));
  CHECK(pooled_p98(n.images) == Approx(1.0).epsilon(1e-12));
  // Relative intensities between repetitions survive.
  CHECK(n.images[1](3, 4) == s[1](3, 4) / p98);

  SECTION("a scaled set normalizes to the same images")
  {
    ImageSet scaled;
    for (auto const &img : s) {
      scaled.emplace_back(CGrid(img.data() * 7.0));
    }
    auto const m = normalize_set(scaled);
    CHECK(m.scale == Approx(7.0 * p98).epsilon(1e-12));
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(test::max_abs(m.images[i].data(), n.images[i].data()) < 1e-12);
    }
  }
  SECTION("idempotent")
  {
    auto const again = normalize_set(n.images);
    CHECK(again.scale == Approx(1.0).epsilon(1e-12));
  }
  SECTION("rejects an all-zero set")
  {
    CHECK_THROWS_AS(normalize_set(ImageSet{ComplexImage(8, 8)}), Error);
  }
}

TEST_CASE("readout flip augmentation", "[train][preprocess]")
{
  std::mt19937_64 rng(2);
  auto const s = random_set(10, 8, 2, rng);
  CHECK(same_bits(augment(s, 0.0, rng), s));
  auto const once = augment(s, 1.0, rng);
  CHECK_FALSE(same_bits(once, s));
  CHECK(once[0](0, 2) == s[0](9, 2));
  CHECK(once[1](5, 0) == s[1](4, 0));
  CHECK(same_bits(augment(once, 1.0, rng), s));

  SECTION("flipped truth and re-sampled k-space stay a consistent pair")
  {
    auto const mask = make_pf_mask(8, {5, 8});
    for (auto const &img : once) {
      auto const y = forward(img, mask);
      // Data consistency residual of the truth against its own samples.
      CGrid k = fft2c(img.data());
      CGrid before = k;
      apply_data_consistency(k, y, 0.0);
      CHECK((k - before).abs().maxCoeff() == 0.0);
    }
  }
  SECTION("never reverses the phase-encode axis")
  {
    for (int t = 0; t < 20; ++t) {
      auto const a = augment(s, 0.5, rng);
      bool const id = same_bits(a, s);
      bool const flipped = same_bits(a, flip_readout(s));
      CHECK((id || flipped));
    }
  }
}

TEST_CASE("repetition subsets", "[train][preprocess]")
{
  CHECK(subset_size(60, 1.0 / 3.0) == 20);
  CHECK(subset_size(15, 1.0 / 3.0) == 5);
  CHECK(subset_size(1, 1.0 / 3.0) == 1);
  CHECK(subset_size(1, 0.01) == 1);
  CHECK(subset_size(6, 1.0 / 3.0) == 2);

  std::mt19937_64 rng(3);
  ImageSet s;
  for (int i = 0; i < 60; ++i) {
    s.emplace_back(CGrid::Constant(8, 8, Complex(i, 0)));
  }
  auto const sub = sample_repetition_subset(s, 1.0 / 3.0, rng);
  REQUIRE(sub.size() == 20);
  std::vector<double> ids;
  for (auto const &img : sub) {
    ids.push_back(img(0, 0).real());
  }
  CHECK(std::is_sorted(ids.begin(), ids.end()));
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());

  // Different draws from a running generator differ.
  auto const other = sample_repetition_subset(s, 1.0 / 3.0, rng);
  bool differs = false;
  for (std::size_t i = 0; i < other.size(); ++i) {
    differs = differs || other[i](0, 0) != sub[i](0, 0);
  }
  CHECK(differs);

  // Every repetition is drawn at about the expected rate.
  std::vector<int> hits(60, 0);
  for (int t = 0; t < 600; ++t) {
    for (auto const &img : sample_repetition_subset(s, 1.0 / 3.0, rng)) {
      ++hits[static_cast<std::size_t>(img(0, 0).real())];
    }
  }
  CHECK(*std::min_element(hits.begin(), hits.end()) > 140);
  CHECK(*std::max_element(hits.begin(), hits.end()) < 260);

  CHECK(sample_repetition_subset(ImageSet{s[4]}, 0.3, rng)[0](0, 0) == Complex(4, 0));
  CHECK_THROWS_AS(sample_repetition_subset(ImageSet{}, 0.5, rng), Error);
}

TEST_CASE("magnitude average", "[train][preprocess]")
{
  std::mt19937_64 rng(4);
  CGrid const x = test::random_complex(9, 11, rng);
  ImageSet one{ComplexImage(x)};
  CHECK((magnitude_average(one) - x.abs()).abs().maxCoeff() == 0.0);
  ImageSet pm{ComplexImage(x), ComplexImage(CGrid(-x))};
  CHECK((magnitude_average(pm) - x.abs()).abs().maxCoeff() < 1e-15);
  ImageSet many(5, ComplexImage(x));
  CHECK((magnitude_average(many) - x.abs()).abs().maxCoeff() < 1e-15);

  auto s = random_set(9, 11, 4, rng);
  RGrid ref = RGrid::Zero(9, 11);
  for (auto const &img : s) {
    ref += img.data().abs();
  }
  ref /= 4.0;
  CHECK((magnitude_average(s) - ref).abs().maxCoeff() < 1e-14);
}

TEST_CASE("loss examples", "[train][loss]")
{
  std::mt19937_64 rng(5);
  RGrid const gt = test::blocky_real(32, 32, rng);
  auto const same = loss(gt, gt, 0.5);
  CHECK(same.total == 0.0);
  CHECK(same.l1_term == 0.0);
  CHECK(same.perceptual_term == 0.0);

  auto const off = loss(RGrid(gt + 0.25), gt, 0.5);
  CHECK(off.l1_term == Approx(0.25).epsilon(1e-12));
  // A constant offset has no gradient.
  CHECK(off.perceptual_term == Approx(0.0).margin(1e-12));
  CHECK(off.total == Approx(off.l1_term + 0.5 * off.perceptual_term));

  auto const other = loss(test::random_real(32, 32, rng), gt, 2.0);
  CHECK(other.total == Approx(other.l1_term + 2.0 * other.perceptual_term).epsilon(1e-14));

  CHECK_THROWS_AS(loss(RGrid::Zero(4, 4), RGrid::Zero(4, 5), 0.5), ShapeMismatch);
  CHECK_THROWS_AS(loss(gt, gt, -1.0), InvalidInput);
}

TEST_CASE("the gradient term penalizes blur more than noise of equal L1", "[train][loss]")
{
  std::mt19937_64 rng(6);
  RGrid const gt = test::blocky_real(64, 64, rng);
  double const target = 0.01;
  RGrid const d_blur = box_blur(gt) - gt;
  RGrid const blurred = gt + d_blur * (target / d_blur.abs().mean());
  std::bernoulli_distribution coin(0.5);
  RGrid noisy = gt;
  for (Index i = 0; i < noisy.size(); ++i) {
    noisy.data()[i] += coin(rng) ? target : -target;
  }
  REQUIRE(l1_loss(blurred, gt) == Approx(target).epsilon(1e-12));
  REQUIRE(l1_loss(noisy, gt) == Approx(target).epsilon(1e-12));
  double const pb = gradient_magnitude_loss(blurred, gt);
  double const pn = gradient_magnitude_loss(noisy, gt);
  INFO("blur " << pb << " noise " << pn);
  CHECK(pb > pn);
}

TEST_CASE("loss gradients match finite differences", "[train][loss]")
{
  std::mt19937_64 rng(7);
  RGrid const gt = test::blocky_real(20, 20, rng);
  RGrid const pred = gt + test::random_real(20, 20, rng, -0.2, 0.2);
  RGrid grad;
  loss(pred, gt, 0.7, &grad);
  double const h = 1e-6;
  double worst = 0;
  for (Index i = 0; i < pred.size(); i += 7) {
    RGrid p = pred, m = pred;
    p.data()[i] += h;
    m.data()[i] -= h;
    double const fd = (loss(p, gt, 0.7).total - loss(m, gt, 0.7).total) / (2 * h);
    worst = std::max(worst, std::abs(fd - grad.data()[i]));
  }
  CHECK(worst < 1e-7);
}

TEST_CASE("loss ignores global phase and repetition order", "[train][loss]")
{
  std::mt19937_64 rng(8);
  auto const out = random_set(16, 16, 4, rng);
  auto const gt = random_set(16, 16, 4, rng);
  RGrid const g = magnitude_average(gt);
  double const base = loss(magnitude_average(out), g, 0.5).total;
  for (double theta : {0.3, 1.7, -2.9}) {
    ImageSet rot;
    for (auto const &img : out) {
      rot.emplace_back(CGrid(img.data() * std::polar(1.0, theta)));
    }
    CHECK(std::abs(loss(magnitude_average(rot), g, 0.5).total - base) <= 1e-10);
  }
  ImageSet perm{out[2], out[0], out[3], out[1]};
  CHECK(loss(magnitude_average(perm), g, 0.5).total == base);
}

TEST_CASE("Adam follows the closed-form update", "[train][adam]")
{
  // f(x) = a/2 (x - b)^2 on a single parameter.
  double const a = 3.0, b = -0.5, lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  net::Param<double> p("x", {1}, 1, 1);
  p.value(0, 0) = 2.0;
  Adam<double> opt(lr, b1, b2, eps);

  double x = 2.0, m = 0, v = 0;
  for (int t = 1; t <= 25; ++t) {
    double const g = a * (x - b);
    p.grad(0, 0) = a * (p.value(0, 0) - b);
    opt.step({&p});
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    x -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
    if (t == 1) {
      // First step moves by lr * g / (|g| + eps).
      double const g0 = a * (2.0 - b);
      CHECK(std::abs(p.value(0, 0) - (2.0 - lr * g0 / (std::abs(g0) + eps))) <= 1e-12);
    }
    CHECK(std::abs(p.value(0, 0) - x) <= 1e-12);
  }
  CHECK(opt.steps() == 25);

  SECTION("zero learning rate leaves values bit-identical")
  {
    Adam<double> still(0.0);
    double const before = p.value(0, 0);
    p.grad(0, 0) = 123.0;
    still.step({&p});
    CHECK(std::bit_cast<std::uint64_t>(p.value(0, 0)) == std::bit_cast<std::uint64_t>(before));
  }
}

TEST_CASE("He initialization variance", "[train][init]")
{
  net::UnrolledNetwork<float> n(net::NetworkConfig::drpf());
  std::mt19937_64 rng(9);
  n.initialize_he(rng);
  int kernels = 0;
  for (auto const *p : n.parameters()) {
    if (p->shape.size() != 4) {
      CHECK(p->value.isZero());
      continue;
    }
    if (p->value.size() < 512) { continue; }
    ++kernels;
    double const fan_in = static_cast<double>(p->shape[1] * p->shape[2] * p->shape[3]);
    Eigen::ArrayXd w = p->value.cast<double>().reshaped().array();
    double const var = (w - w.mean()).square().sum() / static_cast<double>(w.size() - 1);
    INFO(p->name);
    CHECK(std::abs(var / (2.0 / fan_in) - 1.0) < 0.2);
  }
  CHECK(kernels > 0);
}

TEST_CASE("training config", "[train][config]")
{
  auto const c = small_config();
  auto const j = c.to_json();
  auto const back = TrainConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.network.features == 4);
  CHECK(back.pff == PfFactor{5, 8});

  auto const file = std::filesystem::temp_directory_path() / "pfr_test_train_config.json";
  {
    std::ofstream out(file);
    out << R"({"pff": "6/8", "strategy": "cascaded", "iterations": 3, "epochs": 7, "adam_betas": [0.8, 0.99]})";
  }
  auto const loaded = TrainConfig::load(file);
  CHECK(loaded.pff == PfFactor{3, 4});
  CHECK(loaded.network.strategy == net::Strategy::cascaded);
  CHECK(loaded.network.iterations == 3);
  CHECK(loaded.epochs == 7);
  CHECK(loaded.beta1 == 0.8);
  CHECK(loaded.beta2 == 0.99);
  std::filesystem::remove(file);

  CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json{{"pff", "1/2"}}), UnsupportedFactor);
  CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json{{"learning_rate", -1.0}}), InvalidInput);
  CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json{{"adam_betas", {0.9}}}), FormatError);
  CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json::array()), FormatError);
  CHECK_THROWS_AS(TrainConfig::load("/nonexistent/cfg.json"), IoError);
}

TEST_CASE("log records are single JSON lines", "[train][log]")
{
  LogRecord r{3, 120, 0.5, 0.25, 0.625, std::nan("")};
  auto const line = to_json_line(r);
  CHECK(line.find('\n') == std::string::npos);
  auto const j = nlohmann::json::parse(line);
  CHECK(j["epoch"] == 3);
  CHECK(j["step"] == 120);
  CHECK(j["total"] == 0.625);
  CHECK(j["val_psnr"].is_null());
  r.val_psnr = 31.5;
  CHECK(nlohmann::json::parse(to_json_line(r))["val_psnr"] == 31.5);
}

TEST_CASE("training is deterministic and respects lr = 0", "[train][trainer]")
{
  auto const data = small_dataset(6, 41);
  auto const val = small_dataset(2, 42);
  auto cfg = small_config();

  auto const a = train(data, cfg, &val);
  auto const b = train(data, cfg, &val);
  REQUIRE(a.log.size() == 2);
  REQUIRE(b.log.size() == 2);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].epoch == static_cast<int>(i + 1));
    CHECK(a.log[i].step == static_cast<long>((i + 1) * data.slices.size()));
    CHECK(a.log[i].total == b.log[i].total);
    CHECK(a.log[i].val_psnr == b.log[i].val_psnr);
    CHECK(std::isfinite(a.log[i].val_psnr));
  }
  auto const pa = a.network.parameters(), pb = b.network.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->value == pb[i]->value);
  }

  SECTION("a different seed changes the run")
  {
    auto other = cfg;
    other.seed = 6;
    CHECK(train(data, other, &val).log[0].total != a.log[0].total);
  }
  SECTION("zero learning rate")
  {
    auto frozen = cfg;
    frozen.learning_rate = 0.0;
    frozen.epochs = 3;
    auto const r = train(data, frozen, &val, &a.network);
    auto const pr = r.network.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) {
      CHECK((pr[i]->value.array() == pa[i]->value.array()).all());
    }
  }
  SECTION("the sink sees every record")
  {
    std::vector<LogRecord> seen;
    auto const r = train(data, cfg, &val, nullptr, [&](LogRecord const &rec) { seen.push_back(rec); });
    REQUIRE(seen.size() == r.log.size());
    CHECK(seen.back().total == r.log.back().total);
  }
  SECTION("the best validation epoch is returned")
  {
    auto const best = std::max_element(a.log.begin(), a.log.end(), [](auto const &x, auto const &y) {
      return x.val_psnr < y.val_psnr;
    });
    CHECK(a.best_val_psnr == best->val_psnr);
    CHECK(a.best_epoch == best->epoch);
    auto copy = a.network;
    CHECK(validation_psnr(copy, val, cfg.pff) == Approx(a.best_val_psnr).epsilon(1e-12));
  }
}

TEST_CASE("training lowers the loss", "[train][trainer]")
{
  auto const data = small_dataset(12, 43);
  auto cfg = small_config();
  cfg.epochs = 6;
  cfg.learning_rate = 2e-3;
  auto const r = train(data, cfg);
  REQUIRE(r.log.size() == 6);
  CHECK(r.log.back().total < r.log.front().total);
  CHECK(std::isnan(r.log.front().val_psnr));
  CHECK(r.best_epoch == 6);
}

TEST_CASE("training rejects bad inputs", "[train][trainer]")
{
  auto cfg = small_config();
  CHECK_THROWS_AS(train(Dataset{}, cfg), InvalidInput);

  auto data = small_dataset(2, 44);
  auto bad = data;
  bad.slices[0][0](2, 3) = Complex(std::nan(""), 0);
  CHECK_THROWS_AS(train(bad, cfg), Error);

  auto presampled = data;
  presampled.pff = {5, 8};
  CHECK_THROWS_AS(train(presampled, cfg), InvalidInput);

  auto wide = small_config();
  wide.network.features = 5;
  net::UnrolledNetwork<float> init(small_config().network);
  CHECK_THROWS_AS(train(data, wide, nullptr, &init), ShapeMismatch);
}

TEST_CASE("a one-iteration base replicates into every iteration", "[train][two-stage]")
{
  net::NetworkConfig base_cfg = net::NetworkConfig::resnet(net::Strategy::cascaded);
  base_cfg.iterations = 1;
  base_cfg.depth = 2;
  base_cfg.features = 4;
  net::UnrolledNetwork<float> base(base_cfg);
  std::mt19937_64 rng(10);
  base.initialize_he(rng);
  auto const bp = base.parameters();

  for (auto strategy : {net::Strategy::cascaded, net::Strategy::weight_shared}) {
    auto cfg = base_cfg;
    cfg.strategy = strategy;
    cfg.iterations = 3;
    net::UnrolledNetwork<float> target(cfg);
    replicate_base(base, target);
    auto const tp = target.parameters();
    REQUIRE(tp.size() % bp.size() == 0);
    for (std::size_t i = 0; i < tp.size(); ++i) {
      CHECK(tp[i]->value == bp[i % bp.size()]->value);
    }
  }
  auto wider = base_cfg;
  wider.features = 8;
  net::UnrolledNetwork<float> mismatch(wider);
  CHECK_THROWS_AS(replicate_base(base, mismatch), ShapeMismatch);
}
