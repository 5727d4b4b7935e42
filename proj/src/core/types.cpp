#include "pfr/core/types.hpp"
#include "pfr/error.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

namespace pfr {

std::string PfFactor::str() const
{
  if (numerator == denominator) { return "1"; }
  int const g = std::gcd(numerator, denominator);
  return fmt::format("{}/{}", numerator / g, denominator / g);
}

PfFactor PfFactor::parse(std::string const &text)
{
  auto const slash = text.find('/');
  if (slash != std::string::npos) {
    int n = 0, d = 0;
    auto const *b = text.data();
    auto r1 = std::from_chars(b, b + slash, n);
    auto r2 = std::from_chars(b + slash + 1, b + text.size(), d);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r1.ptr != b + slash || r2.ptr != b + text.size() || d <= 0) {
      throw InvalidInput(fmt::format("cannot parse PF factor '{}'", text));
    }
    int const g = std::gcd(n, d);
    return PfFactor{n / (g ? g : 1), d / (g ? g : 1)};
  }
  try {
    std::size_t used = 0;
    double const v = std::stod(text, &used);
    if (used != text.size()) { throw InvalidInput(fmt::format("cannot parse PF factor '{}'", text)); }
    return from_double(v);
  } catch (std::logic_error const &) {
    throw InvalidInput(fmt::format("cannot parse PF factor '{}'", text));
  }
}

PfFactor PfFactor::from_double(double v)
{
  if (!std::isfinite(v) || v <= 0.0) { throw InvalidInput(fmt::format("invalid PF factor {}", v)); }
  // Eighths cover every factor used in practice; fall back to a fine grid.
  for (int d : {1, 2, 4, 8, 16, 1000000}) {
    double const n = std::round(v * d);
    if (std::abs(n / d - v) < 1e-9) {
      int const ni = static_cast<int>(n);
      int const g = std::gcd(ni, d);
      return PfFactor{ni / g, d / g};
    }
  }
  return PfFactor{static_cast<int>(std::round(v * 1000000)), 1000000};
}

SamplingMask::SamplingMask(Index pe_size, PfFactor pff)
  : pe_size_(pe_size)
  , pff_(pff)
{
  if (pff.denominator <= 0 || pff.numerator <= 0) { throw InvalidInput("PF factor must be positive"); }
  if (2L * pff.numerator <= pff.denominator) {
    throw UnsupportedFactor(fmt::format("PF factor {} must exceed 1/2", pff.str()));
  }
  if (pff.numerator > pff.denominator) { throw UnsupportedFactor(fmt::format("PF factor {} exceeds 1", pff.str())); }
  if (pe_size < 8) { throw InvalidInput(fmt::format("phase-encode size {} below minimum of 8", pe_size)); }
  // ceil(pff * W) in exact integer arithmetic
  long const num = static_cast<long>(pff.numerator) * pe_size;
  acquired_ = static_cast<Index>((num + pff.denominator - 1) / pff.denominator);
}

Index SamplingMask::mirror(Index line) const
{
  Index const m = (2 * center() - line) % pe_size_;
  return m < 0 ? m + pe_size_ : m;
}

bool all_finite(CGrid const &g)
{
  for (Index i = 0; i < g.size(); ++i) {
    auto const v = g.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) { return false; }
  }
  return true;
}

ComplexImage::ComplexImage(CGrid data)
  : data_(std::move(data))
{
  if (data_.rows() < 8 || data_.cols() < 8) {
    throw InvalidInput(fmt::format("image of {}x{} is smaller than 8x8", data_.rows(), data_.cols()));
  }
  if (!all_finite(data_)) { throw InvalidInput("image contains non-finite values"); }
}

ComplexImage::ComplexImage(Index rows, Index cols)
  : ComplexImage(CGrid::Zero(rows, cols))
{
}

KSpaceData::KSpaceData(CGrid samples, SamplingMask mask)
  : samples_(std::move(samples))
  , mask_(mask)
{
  if (samples_.cols() != mask_.pe_size()) {
    throw ShapeMismatch(fmt::format("k-space has {} PE lines but mask expects {}", samples_.cols(), mask_.pe_size()));
  }
  if (samples_.rows() < 8) { throw InvalidInput("k-space has fewer than 8 readout samples"); }
  if (!all_finite(samples_)) { throw InvalidInput("k-space contains non-finite values"); }
  for (Index c = mask_.acquired_count(); c < samples_.cols(); ++c) {
    for (Index r = 0; r < samples_.rows(); ++r) {
      if (samples_(r, c) != Complex(0.0)) {
        throw InvalidInput(fmt::format("k-space line {} is not acquired but holds data", c));
      }
    }
  }
}

KSpaceData KSpaceData::masked(CGrid samples, SamplingMask const &mask)
{
  if (samples.cols() != mask.pe_size()) {
    throw ShapeMismatch(fmt::format("k-space has {} PE lines but mask expects {}", samples.cols(), mask.pe_size()));
  }
  Index const m = mask.acquired_count();
  samples.rightCols(samples.cols() - m).setZero();
  return KSpaceData(std::move(samples), mask);
}

void validate_set(ImageSet const &set)
{
  if (set.empty()) { throw InvalidInput("empty repetition set"); }
  for (auto const &img : set) {
    if (img.rows() != set.front().rows() || img.cols() != set.front().cols()) {
      throw ShapeMismatch("repetitions differ in shape");
    }
  }
}

void validate_set(KSpaceSet const &set)
{
  if (set.empty()) { throw InvalidInput("empty repetition set"); }
  for (auto const &k : set) {
    if (k.rows() != set.front().rows() || k.cols() != set.front().cols()) {
      throw ShapeMismatch("repetitions differ in shape");
    }
    if (!(k.mask() == set.front().mask())) { throw ShapeMismatch("repetitions use different sampling masks"); }
  }
}

} // namespace pfr
