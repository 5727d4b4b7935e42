#pragma once

#include <Eigen/Core>
#include <complex>
#include <string>
#include <vector>

namespace pfr {

using Index = Eigen::Index;
using Complex = std::complex<double>;

// Row-major so that the (readout, phase-encode) grid matches FFTW's 2-D layout
// and the on-disk payload order.
using CGrid = Eigen::Array<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RGrid = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Partial Fourier factor kept as an exact fraction so that the acquired line
/// count never suffers from floating point rounding.
struct PfFactor
{
  int numerator = 1;
  int denominator = 1;

  double value() const { return static_cast<double>(numerator) / denominator; }
  bool full() const { return numerator == denominator; }
  std::string str() const;

  /// Accepts "5/8", "0.625" or "1".
  static PfFactor parse(std::string const &text);
  static PfFactor from_double(double v);

  friend bool operator==(PfFactor const &a, PfFactor const &b)
  {
    return static_cast<long>(a.numerator) * b.denominator == static_cast<long>(b.numerator) * a.denominator;
  }
};

/// PF mask along the phase-encode (column) axis. Lines are indexed in centered
/// order with DC at floor(W/2); acquired lines are [0, acquired_count).
class SamplingMask
{
public:
  SamplingMask(Index pe_size, PfFactor pff);

  Index pe_size() const { return pe_size_; }
  PfFactor pff() const { return pff_; }
  Index acquired_count() const { return acquired_; }
  Index center() const { return pe_size_ / 2; }
  bool full() const { return acquired_ == pe_size_; }

  bool acquired(Index line) const { return line >= 0 && line < acquired_; }

  /// Symmetric band [band_begin, band_end) = [W - M, M).
  Index band_begin() const { return pe_size_ - acquired_; }
  Index band_end() const { return acquired_; }
  Index band_size() const { return band_end() - band_begin(); }

  /// Line holding the conjugate partner of `line` about the center (mod W).
  Index mirror(Index line) const;

  friend bool operator==(SamplingMask const &a, SamplingMask const &b)
  {
    return a.pe_size_ == b.pe_size_ && a.acquired_ == b.acquired_;
  }

private:
  Index pe_size_;
  PfFactor pff_;
  Index acquired_;
};

/// 2-D complex image, rows = readout (H), columns = phase encode (W).
class ComplexImage
{
public:
  explicit ComplexImage(CGrid data);
  ComplexImage(Index rows, Index cols);

  Index rows() const { return data_.rows(); }
  Index cols() const { return data_.cols(); }
  CGrid const &data() const { return data_; }
  Complex operator()(Index r, Index c) const { return data_(r, c); }

  RGrid magnitude() const { return data_.abs(); }
  RGrid phase() const { return data_.arg(); }

private:
  CGrid data_;
};

/// Complex k-space samples with exact zeros on lines the mask does not acquire.
class KSpaceData
{
public:
  /// Validates that non-acquired lines are exactly zero.
  KSpaceData(CGrid samples, SamplingMask mask);

  /// Zeros the non-acquired lines of `samples`.
  static KSpaceData masked(CGrid samples, SamplingMask const &mask);

  Index rows() const { return samples_.rows(); }
  Index cols() const { return samples_.cols(); }
  CGrid const &samples() const { return samples_; }
  SamplingMask const &mask() const { return mask_; }

private:
  CGrid samples_;
  SamplingMask mask_;
};

using ImageSet = std::vector<ComplexImage>;
using KSpaceSet = std::vector<KSpaceData>;

/// Enforces the RepetitionSet invariants (non-empty, shared shape and mask).
void validate_set(ImageSet const &set);
void validate_set(KSpaceSet const &set);

bool all_finite(CGrid const &g);

} // namespace pfr
