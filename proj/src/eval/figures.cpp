#include "pfr/eval/figures.hpp"
#include "pfr/error.hpp"
#include "pfr/train/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numbers>

namespace pfr {

namespace fs = std::filesystem;

void write_pgm(fs::path const &path, RGrid const &img)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw IoError(fmt::format("cannot write '{}'", path.string())); }
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  std::string row(static_cast<std::size_t>(img.cols()), '\0');
  for (Index r = 0; r < img.rows(); ++r) {
    for (Index c = 0; c < img.cols(); ++c) {
      double const v = std::isfinite(img(r, c)) ? std::clamp(img(r, c), 0.0, 1.0) : 0.0;
      row[static_cast<std::size_t>(c)] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) { throw IoError(fmt::format("failed writing '{}'", path.string())); }
}

RGrid render_boxplot(std::vector<std::vector<double>> const &columns, Index height, Index column_width)
{
  if (columns.empty() || height < 8 || column_width < 8) { throw InvalidInput("boxplot needs data and a usable size"); }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (auto const &col : columns) {
    for (double v : col) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!std::isfinite(lo)) { lo = 0.0, hi = 1.0; }
  if (hi - lo < 1e-12) { lo -= 0.5, hi += 0.5; }
  Index const margin = 4;
  auto to_row = [&](double v) {
    double const t = (std::clamp(v, lo, hi) - lo) / (hi - lo);
    return static_cast<Index>(std::lround((1.0 - t) * static_cast<double>(height - 1 - 2 * margin))) + margin;
  };
  RGrid img = RGrid::Zero(height, column_width * static_cast<Index>(columns.size()));
  for (std::size_t m = 0; m < columns.size(); ++m) {
    std::vector<double> v;
    std::copy_if(columns[m].begin(), columns[m].end(), std::back_inserter(v), [](double x) { return std::isfinite(x); });
    if (v.empty()) { continue; }
    Index const x0 = static_cast<Index>(m) * column_width;
    Index const mid = x0 + column_width / 2;
    Index const left = x0 + column_width / 4, right = x0 + 3 * column_width / 4;
    Index const r_min = to_row(*std::min_element(v.begin(), v.end()));
    Index const r_max = to_row(*std::max_element(v.begin(), v.end()));
    Index const r_q1 = to_row(percentile(v, 25)), r_q3 = to_row(percentile(v, 75));
    Index const r_med = to_row(percentile(v, 50));
    for (Index r = r_max; r <= r_min; ++r) {
      img(r, mid) = 0.5;
    }
    for (Index r = r_q3; r <= r_q1; ++r) {
      img(r, left) = img(r, right) = 0.8;
    }
    for (Index c = left; c <= right; ++c) {
      img(r_q1, c) = img(r_q3, c) = 0.8;
      img(r_med, c) = 1.0;
    }
    for (Index c = mid - column_width / 8; c <= mid + column_width / 8; ++c) {
      img(r_min, c) = img(r_max, c) = 0.5;
    }
  }
  return img;
}

void emit_figures(EvalReport const &report, std::vector<std::vector<ImageSet>> const &reconstructions,
                  std::vector<ImageSet> const &truths,
                  fs::path const &out_dir)
{
  if (report.records.empty()) { throw InvalidInput("no records to render"); }
  std::error_code ec;
  fs::create_directories(out_dir / "panels", ec);
  if (ec) { throw IoError(fmt::format("cannot create '{}': {}", (out_dir / "panels").string(), ec.message())); }

  {
    std::ofstream csv(out_dir / "metrics.csv", std::ios::binary);
    if (!csv) { throw IoError(fmt::format("cannot write '{}'", (out_dir / "metrics.csv").string())); }
    csv << metrics_csv(report.records);
  }

  for (std::size_t s = 0; s < reconstructions.size(); ++s) {
    RGrid const gt = magnitude_average(truths.at(s));
    double const scale = gt.maxCoeff() > 0 ? 1.0 / gt.maxCoeff() : 1.0;
    for (std::size_t m = 0; m < reconstructions[s].size(); ++m) {
      auto const &rec = reconstructions[s][m];
      RGrid const avg = magnitude_average(rec);
      auto const stem = fmt::format("slice{:04d}_{}", s, report.summaries.at(m).method);
      write_pgm(out_dir / "panels" / (stem + "_recon.pgm"), avg * scale);
      write_pgm(out_dir / "panels" / (stem + "_diff.pgm"), 5.0 * (avg - gt).abs() * scale);
      RGrid const phase = (rec.front().phase() + std::numbers::pi) / (2.0 * std::numbers::pi);
      write_pgm(out_dir / "panels" / (stem + "_phase.pgm"), phase);
    }
  }

  std::vector<std::vector<double>> p, q;
  for (auto const &s : report.summaries) {
    std::vector<double> a, b;
    for (auto const &r : report.records) {
      if (r.method == s.method) {
        a.push_back(r.psnr);
        b.push_back(r.ssim);
      }
    }
    p.push_back(std::move(a));
    q.push_back(std::move(b));
  }
  write_pgm(out_dir / "boxplot_psnr.pgm", render_boxplot(p));
  write_pgm(out_dir / "boxplot_ssim.pgm", render_boxplot(q));
  std::ofstream legend(out_dir / "boxplot_columns.txt");
  for (auto const &s : report.summaries) {
    legend << s.method << '\n';
  }
}

} // namespace pfr
