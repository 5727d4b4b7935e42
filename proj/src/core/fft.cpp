#include "pfr/core/fft.hpp"
#include "pfr/error.hpp"

#include <cmath>
#include <fftw3.h>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace pfr {

namespace {

// The FFTW planner is not re-entrant; execution with new-array functions is.
std::mutex &planner_mutex()
{
  static std::mutex m;
  return m;
}

template <typename T>
struct Fftw;

template <>
struct Fftw<double>
{
  using Plan = fftw_plan;
  static Plan make(int rows, int cols, int sign)
  {
    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(rows) * cols);
    auto *p = reinterpret_cast<fftw_complex *>(scratch.data());
    return fftw_plan_dft_2d(rows, cols, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  static void run(Plan p, std::complex<double> *data)
  {
    auto *d = reinterpret_cast<fftw_complex *>(data);
    fftw_execute_dft(p, d, d);
  }
};

template <>
struct Fftw<float>
{
  using Plan = fftwf_plan;
  static Plan make(int rows, int cols, int sign)
  {
    std::vector<std::complex<float>> scratch(static_cast<std::size_t>(rows) * cols);
    auto *p = reinterpret_cast<fftwf_complex *>(scratch.data());
    return fftwf_plan_dft_2d(rows, cols, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  static void run(Plan p, std::complex<float> *data)
  {
    auto *d = reinterpret_cast<fftwf_complex *>(data);
    fftwf_execute_dft(p, d, d);
  }
};

template <typename T>
typename Fftw<T>::Plan cached_plan(int rows, int cols, int sign)
{
  // Plans live for the whole process.
  static std::map<std::tuple<int, int, int>, typename Fftw<T>::Plan> plans;
  std::lock_guard lock(planner_mutex());
  auto const key = std::make_tuple(rows, cols, sign);
  auto it = plans.find(key);
  if (it == plans.end()) { it = plans.emplace(key, Fftw<T>::make(rows, cols, sign)).first; }
  return it->second;
}

// out[(i + n/2) % n] = in[i] applied on both axes (forward), or its inverse.
template <typename T>
void shift2(std::complex<T> const *in, std::complex<T> *out, Index rows, Index cols, bool to_centered)
{
  Index const hr = rows / 2, hc = cols / 2;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      Index const rr = (r + hr) % rows;
      Index const cc = (c + hc) % cols;
      if (to_centered) {
        out[rr * cols + cc] = in[r * cols + c];
      } else {
        out[r * cols + c] = in[rr * cols + cc];
      }
    }
  }
}

} // namespace

template <typename T>
void centered_fft2(std::span<std::complex<T>> data, Index rows, Index cols, bool inverse)
{
  if (static_cast<Index>(data.size()) != rows * cols) { throw ShapeMismatch("FFT buffer does not match its shape"); }
  auto const plan = cached_plan<T>(static_cast<int>(rows), static_cast<int>(cols), inverse ? FFTW_BACKWARD : FFTW_FORWARD);
  std::vector<std::complex<T>> tmp(data.size());
  shift2(data.data(), tmp.data(), rows, cols, false);
  Fftw<T>::run(plan, tmp.data());
  shift2(tmp.data(), data.data(), rows, cols, true);
  T const scale = T(1) / std::sqrt(static_cast<T>(rows * cols));
  for (auto &v : data) {
    v *= scale;
  }
}

template void centered_fft2<float>(std::span<std::complex<float>>, Index, Index, bool);
template void centered_fft2<double>(std::span<std::complex<double>>, Index, Index, bool);

CGrid fft2c(CGrid const &img)
{
  CGrid out = img;
  centered_fft2<double>(std::span(out.data(), static_cast<std::size_t>(out.size())), out.rows(), out.cols(), false);
  return out;
}

CGrid ifft2c(CGrid const &ksp)
{
  CGrid out = ksp;
  centered_fft2<double>(std::span(out.data(), static_cast<std::size_t>(out.size())), out.rows(), out.cols(), true);
  return out;
}

KSpaceData fft2c(ComplexImage const &img)
{
  return KSpaceData(fft2c(img.data()), SamplingMask(img.cols(), PfFactor{1, 1}));
}

ComplexImage ifft2c(KSpaceData const &ksp) { return ComplexImage(ifft2c(ksp.samples())); }

} // namespace pfr
