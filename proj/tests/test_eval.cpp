#include "pfr/core/fft.hpp"
#include "pfr/core/model.hpp"
#include "pfr/error.hpp"
#include "pfr/eval/evaluate.hpp"
#include "pfr/eval/figures.hpp"
#include "pfr/eval/kspace.hpp"
#include "pfr/eval/metrics.hpp"
#include "pfr/net/checkpoint.hpp"
#include "pfr/synth.hpp"
#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace pfr;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

// Direct windowed SSIM, one 2-D Gaussian window at a time.
double naive_ssim(RGrid const &x, RGrid const &y, double range)
{
  int const n = 11;
  double const sigma = 1.5;
  std::vector<double> w(n * n);
  double total = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double const di = i - 5, dj = j - 5;
      w[i * n + j] = std::exp(-(di * di + dj * dj) / (2 * sigma * sigma));
      total += w[i * n + j];
    }
  }
  for (auto &v : w) {
    v /= total;
  }
  double const c1 = std::pow(0.01 * range, 2), c2 = std::pow(0.03 * range, 2);
  double sum = 0;
  int count = 0;
  for (Index r = 0; r + n <= x.rows(); ++r) {
    for (Index c = 0; c + n <= x.cols(); ++c) {
      double mx = 0, my = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          mx += w[i * n + j] * x(r + i, c + j);
          my += w[i * n + j] * y(r + i, c + j);
        }
      }
      double vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double const a = x(r + i, c + j) - mx, b = y(r + i, c + j) - my;
          vx += w[i * n + j] * a * a;
          vy += w[i * n + j] * b * b;
          cxy += w[i * n + j] * a * b;
        }
      }
      sum += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return sum / count;
}

// Two-sided exact p-value by enumerating all 2^n sign assignments.
double brute_wilcoxon_p(std::vector<double> const &d, double *w_plus)
{
  std::vector<double> nz;
  for (double v : d) {
    if (v != 0.0) { nz.push_back(v); }
  }
  std::size_t const n = nz.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      below += std::abs(nz[j]) < std::abs(nz[i]) ? 1 : 0;
      equal += std::abs(nz[j]) == std::abs(nz[i]) ? 1 : 0;
    }
    ranks[i] = below + (equal + 1) / 2.0;
  }
  double obs = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    obs += nz[i] > 0 ? ranks[i] : 0;
    total += ranks[i];
  }
  *w_plus = obs;
  double const dev = std::abs(obs - total / 2);
  std::size_t extreme = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      s += (mask >> i & 1) ? ranks[i] : 0;
    }
    extreme += std::abs(s - total / 2) >= dev - 1e-9 ? 1 : 0;
  }
  return static_cast<double>(extreme) / static_cast<double>(std::size_t{1} << n);
}

RGrid checkerboard(Index n)
{
  RGrid g(n, n);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      g(r, c) = (r + c) % 2 == 0 ? 1.0 : 0.0;
    }
  }
  return g;
}

Dataset constant_phase_dataset(std::size_t slices, std::uint64_t seed, int reps = 2)
{
  PhantomSpec spec;
  spec.phase_mode = PhaseMode::constant;
  spec.constant_phase = 0.4;
  spec.n_repetitions = reps;
  spec.height = 32;
  spec.width = 32;
  spec.seed = seed;
  return generate_dataset(spec, slices);
}

fs::path temp_dir(std::string const &name)
{
  auto const d = fs::temp_directory_path() / "pfr_test_eval" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<unsigned char> pgm_pixels(fs::path const &p, Index *w = nullptr, Index *h = nullptr)
{
  std::ifstream in(p, std::ios::binary);
  std::string magic;
  Index ww = 0, hh = 0, maxv = 0;
  in >> magic >> ww >> hh >> maxv;
  in.get();
  REQUIRE(magic == "P5");
  REQUIRE(maxv == 255);
  std::vector<unsigned char> px(static_cast<std::size_t>(ww * hh));
  in.read(reinterpret_cast<char *>(px.data()), static_cast<std::streamsize>(px.size()));
  REQUIRE(in.gcount() == static_cast<std::streamsize>(px.size()));
  if (w) { *w = ww; }
  if (h) { *h = hh; }
  return px;
}

} // namespace

TEST_CASE("psnr examples", "[eval][metrics]")
{
  RGrid const one = RGrid::Ones(16, 16);
  CHECK(psnr(one, one) == kInfinitePsnr);
  CHECK(psnr(RGrid(one * 0.9), one, 1.0) == Approx(20.0).epsilon(1e-12));
  CHECK(psnr(RGrid(one * 0.9), one) == Approx(20.0).epsilon(1e-12));
  for (double e : {0.01, 0.3}) {
    for (double r : {1.0, 4.0}) {
      CHECK(psnr(RGrid(one + e), one, r) == Approx(20.0 * std::log10(r / e)).epsilon(1e-12));
    }
  }
  // Default range is the ground-truth maximum.
  std::mt19937_64 rng(1);
  RGrid const gt = test::random_real(16, 16, rng, 0.0, 3.0);
  RGrid const pred = gt + 0.05;
  CHECK(psnr(pred, gt) == Approx(psnr(pred, gt, gt.maxCoeff())).epsilon(1e-14));

  SECTION("strictly decreasing in added noise")
  {
    RGrid const z = test::random_real(16, 16, rng, -1.0, 1.0);
    double last = kInfinitePsnr;
    for (double s : {0.01, 0.02, 0.05, 0.1}) {
      double const v = psnr(RGrid(gt + s * z), gt);
      CHECK(v < last);
      last = v;
    }
  }
  CHECK_THROWS_AS(psnr(one, RGrid::Ones(16, 15)), ShapeMismatch);
  CHECK(psnr(RGrid(one * 0.9), one, -1.0) == Approx(20.0).epsilon(1e-12));
  // Differences at rounding level count as identical.
  CHECK(psnr(RGrid(one * (1.0 + 1e-16)), one) == kInfinitePsnr);
  CHECK(std::isfinite(psnr(RGrid(one * (1.0 + 1e-12)), one)));
}

TEST_CASE("ssim agrees with a direct windowed computation", "[eval][metrics]")
{
  std::mt19937_64 rng(2);
  RGrid const gt = test::blocky_real(24, 20, rng);
  RGrid const pred = gt + test::random_real(24, 20, rng, -0.1, 0.1);
  CHECK(ssim(pred, gt, 1.0) == Approx(naive_ssim(pred, gt, 1.0)).epsilon(1e-10));
  CHECK(ssim(pred, gt) == Approx(naive_ssim(pred, gt, gt.maxCoeff())).epsilon(1e-10));
}

TEST_CASE("ssim examples", "[eval][metrics]")
{
  std::mt19937_64 rng(3);
  RGrid const gt = test::blocky_real(64, 64, rng);
  CHECK(ssim(gt, gt) == Approx(1.0).epsilon(1e-12));

  RGrid const board = checkerboard(64);
  double const inverted = ssim(RGrid(1.0 - board), board, 1.0);
  INFO("inverted checkerboard " << inverted);
  CHECK(inverted < 0.2);

  double const affine = ssim(RGrid(2.0 * gt + 0.1), gt);
  double const noisy = ssim(RGrid(gt + test::random_real(64, 64, rng, -0.5, 0.5)), gt);
  CHECK(affine < 1.0);
  CHECK(affine > noisy);

  // Joint scaling with the data range leaves SSIM unchanged.
  RGrid const pred = gt + test::random_real(64, 64, rng, -0.1, 0.1);
  CHECK(ssim(RGrid(3.0 * pred), RGrid(3.0 * gt), 3.0) == Approx(ssim(pred, gt, 1.0)).epsilon(1e-12));
  CHECK(ssim(pred, gt) <= 1.0);
  CHECK_THROWS_AS(ssim(RGrid::Ones(8, 8), RGrid::Ones(8, 8)), InvalidInput);
}

TEST_CASE("summary statistics", "[eval][stats]")
{
  std::vector<double> const v{5, 1, 4, 2, 3};
  auto const s = summarize(v);
  CHECK(s.count == 5);
  CHECK(s.mean == Approx(3.0));
  CHECK(s.stddev == Approx(std::sqrt(2.5)));
  CHECK(s.median == Approx(3.0));
  CHECK(s.q1 == Approx(2.0));
  CHECK(s.q3 == Approx(4.0));
  std::vector<double> const even{1, 2, 3, 10};
  CHECK(summarize(even).median == Approx(2.5));
  CHECK(summarize(even).q1 == Approx(1.75));
  CHECK(summarize(even).q3 == Approx(4.75));
  std::vector<double> const single{7};
  CHECK(summarize(single).stddev == 0.0);
  CHECK(summarize(single).q1 == 7.0);
}

TEST_CASE("Wilcoxon signed-rank test", "[eval][stats]")
{
  SECTION("all differences positive")
  {
    std::vector<double> a, b;
    for (int i = 1; i <= 10; ++i) {
      a.push_back(i + 0.5 * i);
      b.push_back(i);
    }
    auto const r = wilcoxon_signed_rank(a, b);
    CHECK(r.n == 10);
    CHECK(r.statistic == 55.0);
    CHECK(r.p_value == Approx(2.0 / 1024.0).epsilon(1e-12));
  }
  SECTION("mixed signs match enumeration")
  {
    std::vector<double> const d{1, 2, 3, -4, 5};
    std::vector<double> const zero(5, 0.0);
    auto const r = wilcoxon_signed_rank(d, zero);
    CHECK(r.statistic == 11.0);
    CHECK(r.p_value == Approx(14.0 / 32.0).epsilon(1e-12));
  }
  SECTION("ties and zeros match enumeration")
  {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> u(-4, 4);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> a, b;
      for (int i = 0; i < 12; ++i) {
        a.push_back(u(rng));
        b.push_back(0.0);
      }
      double w = 0;
      double const p = brute_wilcoxon_p(a, &w);
      auto const r = wilcoxon_signed_rank(a, b);
      CHECK(r.statistic == Approx(w));
      CHECK(r.p_value == Approx(p).epsilon(1e-12));
    }
  }
  SECTION("identical samples")
  {
    std::vector<double> const a{1, 2, 3};
    auto const r = wilcoxon_signed_rank(a, a);
    CHECK(r.n == 0);
    CHECK(r.p_value == 1.0);
  }
  std::vector<double> const a{1, 2}, b{1};
  CHECK_THROWS_AS(wilcoxon_signed_rank(a, b), ShapeMismatch);
}

TEST_CASE("evaluate on fully sampled data", "[eval][harness]")
{
  auto const data = constant_phase_dataset(3, 5);
  EvalOptions opt;
  opt.pff = {1, 1};
  auto const report = evaluate(data, {"zero_fill"}, opt);
  REQUIRE(report.records.size() == 3);
  for (auto const &r : report.records) {
    CHECK(r.psnr == kInfinitePsnr);
    CHECK(r.ssim == Approx(1.0).epsilon(1e-12));
  }
  auto const csv = metrics_csv(report.records);
  CHECK(csv.rfind("slice,method,pff,psnr_db,ssim\n", 0) == 0);
  CHECK(csv.find("0,zero_fill,1,inf,1.000000") != std::string::npos);
}

TEST_CASE("evaluate is deterministic and ordered", "[eval][harness]")
{
  auto data = constant_phase_dataset(2, 6);
  PhantomSpec hard;
  hard.height = hard.width = 32;
  hard.n_repetitions = 2;
  hard.patch_min_freq = 5;
  hard.patch_max_freq = 8;
  hard.seed = 7;
  data.slices.push_back(generate_dataset(hard, 1).slices[0]);
  // Slice 3 replicates slice 2.
  data.slices.push_back(data.slices[2]);

  EvalOptions opt;
  std::vector<std::string> const methods{"pocs", "zero_fill", "homodyne"};
  auto const a = evaluate(data, methods, opt);
  auto const b = evaluate(data, methods, opt);
  CHECK(metrics_csv(a.records) == metrics_csv(b.records));
  REQUIRE(a.records.size() == 12);
  // Canonical method order within each slice.
  CHECK(a.records[0].method == "zero_fill");
  CHECK(a.records[1].method == "pocs");
  CHECK(a.records[2].method == "homodyne");
  for (std::size_t m = 0; m < 3; ++m) {
    CHECK(a.records[6 + m].psnr == a.records[9 + m].psnr);
    CHECK(a.records[6 + m].ssim == a.records[9 + m].ssim);
  }
  REQUIRE(a.summaries.size() == 3);
  CHECK(a.tests.size() == 3);
  CHECK(a.summaries[0].psnr.count == 4);
  // Constant phase is easy; patches are not.
  CHECK(a.records[1].psnr > 40.0);
  CHECK(a.records[7].psnr < a.records[1].psnr);
  CHECK_FALSE(summary_text(a).empty());
}

TEST_CASE("evaluate rejects bad requests", "[eval][harness]")
{
  auto const data = constant_phase_dataset(1, 8);
  EvalOptions opt;
  CHECK_THROWS_AS(evaluate(data, {"drpf_max"}, opt), InvalidInput);
  CHECK_THROWS_AS(evaluate(data, {"magic"}, opt), InvalidInput);
  CHECK_THROWS_AS(evaluate(data, {}, opt), InvalidInput);
  CHECK_THROWS_AS(evaluate(Dataset{}, {"pocs"}, opt), InvalidInput);

  SECTION("checkpoints must match the evaluation factor")
  {
    auto const dir = temp_dir("ckpt");
    net::NetworkConfig cfg;
    cfg.iterations = 1;
    cfg.depth = 2;
    cfg.features = 4;
    net::UnrolledNetwork<float> n(cfg);
    net::save_checkpoint(dir / "m.ckpt", n, PfFactor{6, 8});
    opt.checkpoints["drpf_max"] = dir / "m.ckpt";
    CHECK_THROWS_AS(evaluate(data, {"drpf_max"}, opt), InvalidInput);
    opt.pff = {6, 8};
    auto const r = evaluate(data, {"drpf_max", "zero_fill"}, opt);
    CHECK(r.records.size() == 2);
    CHECK(r.records[0].method == "zero_fill");
    CHECK(r.records[1].method == "drpf_max");
  }
}

TEST_CASE("learned methods need a network", "[eval][harness]")
{
  auto const data = constant_phase_dataset(1, 9);
  EvalOptions opt;
  auto const mask = make_pf_mask(32, opt.pff);
  KSpaceSet y;
  for (auto const &img : data.images(0)) {
    y.push_back(forward(img, mask));
  }
  CHECK_THROWS_AS(reconstruct_with("cascaded", y, opt), InvalidInput);
  CHECK(reconstruct_with("zero_fill", y, opt).size() == 2);
  CHECK(is_learned_method("weight_shared"));
  CHECK_FALSE(is_learned_method("homodyne"));
  CHECK(known_methods().size() == 8);
}

TEST_CASE("k-space maximum sits at DC for constant phase", "[eval][kmax]")
{
  auto const data = constant_phase_dataset(5, 10, 3);
  auto const h = max_freq_histogram(data, {5, 8});
  CHECK(h.total == 15);
  CHECK(h.outside == 0);
  CHECK(h.outside_fraction() == 0.0);
  REQUIRE(h.counts.size() == 32);
  CHECK(h.counts[16] == 15);
  CHECK_THROWS_AS(max_freq_histogram(Dataset{}, {5, 8}), Error);
}

TEST_CASE("a linear phase ramp shifts the k-space maximum", "[eval][kmax]")
{
  PhantomSpec spec;
  spec.phase_mode = PhaseMode::constant;
  spec.n_repetitions = 1;
  spec.seed = 11;
  auto const img = generate_phantom(spec).repetitions.front().data();
  Index const w = img.cols();
  Index const base = max_frequency_line(fft2c(img));
  CHECK(base == w / 2);
  for (int k = -10; k <= 10; ++k) {
    CGrid ramped = img;
    for (Index c = 0; c < w; ++c) {
      ramped.col(c) *= std::polar(1.0, 2.0 * std::numbers::pi * k * static_cast<double>(c) / static_cast<double>(w));
    }
    INFO("k = " << k);
    CHECK(max_frequency_line(fft2c(ramped)) == base + k);
  }

  SECTION("large positive ramps leave the acquired region")
  {
    CGrid ramped = img;
    for (Index c = 0; c < w; ++c) {
      ramped.col(c) *= std::polar(1.0, 2.0 * std::numbers::pi * 10.0 * static_cast<double>(c) / static_cast<double>(w));
    }
    auto const h = max_freq_histogram(make_dataset({ImageSet{ComplexImage(ramped)}}), {5, 8});
    CHECK(h.outside == 1);
    CHECK(h.counts[static_cast<std::size_t>(base + 10)] == 1);
  }
}

TEST_CASE("figure emission", "[eval][figures]")
{
  auto const data = constant_phase_dataset(1, 12);
  EvalOptions opt;
  opt.pff = {1, 1};
  std::vector<std::vector<ImageSet>> recons;
  std::vector<ImageSet> truths;
  auto const report = evaluate(data, {"zero_fill"}, opt, &recons, &truths);
  auto const dir = temp_dir("figs");
  emit_figures(report, recons, truths, dir);

  std::vector<std::string> panels;
  for (auto const &e : fs::directory_iterator(dir / "panels")) {
    panels.push_back(e.path().filename().string());
  }
  std::sort(panels.begin(), panels.end());
  REQUIRE(panels.size() == 3);
  CHECK(panels[0] == "slice0000_zero_fill_diff.pgm");
  CHECK(panels[1] == "slice0000_zero_fill_phase.pgm");
  CHECK(panels[2] == "slice0000_zero_fill_recon.pgm");

  std::ifstream csv(dir / "metrics.csv");
  std::string line;
  int rows = 0;
  std::getline(csv, line);
  CHECK(line == "slice,method,pff,psnr_db,ssim");
  while (std::getline(csv, line)) {
    ++rows;
  }
  CHECK(rows == 1);

  // Identical prediction and truth give a black difference panel.
  Index w = 0, h = 0;
  auto const diff = pgm_pixels(dir / "panels" / panels[0], &w, &h);
  CHECK(w == 32);
  CHECK(h == 32);
  CHECK(std::all_of(diff.begin(), diff.end(), [](unsigned char v) { return v == 0; }));
  auto const recon = pgm_pixels(dir / "panels" / panels[2]);
  CHECK(*std::max_element(recon.begin(), recon.end()) > 0);
  CHECK(fs::exists(dir / "boxplot_psnr.pgm"));

  SECTION("unwritable output directory")
  {
    auto const blocker = dir / "file";
    std::ofstream(blocker) << "x";
    CHECK_THROWS_AS(emit_figures(report, recons, truths, blocker / "out"), IoError);
  }
  SECTION("no records")
  {
    CHECK_THROWS_AS(emit_figures(EvalReport{}, recons, truths, dir), InvalidInput);
  }
}

TEST_CASE("boxplots", "[eval][figures]")
{
  auto const single = render_boxplot({{0.7}, {0.7}});
  CHECK(single.rows() == 200);
  CHECK(single.cols() == 80);
  CHECK(single.maxCoeff() > 0.0);
  CHECK(std::isfinite(single.sum()));

  auto const spread = render_boxplot({{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}});
  CHECK(spread.maxCoeff() > 0.0);
  CHECK_THROWS_AS(render_boxplot({}), InvalidInput);
}

TEST_CASE("pgm writer clips to the unit range", "[eval][figures]")
{
  auto const dir = temp_dir("pgm");
  RGrid img(2, 3);
  img << -1.0, 0.0, 0.5, 1.0, 2.0, 0.25;
  write_pgm(dir / "a.pgm", img);
  Index w = 0, h = 0;
  auto const px = pgm_pixels(dir / "a.pgm", &w, &h);
  CHECK(w == 3);
  CHECK(h == 2);
  CHECK(px == std::vector<unsigned char>{0, 0, 128, 255, 255, 64});
  CHECK_THROWS_AS(write_pgm(dir / "missing" / "b.pgm", img), IoError);
}
