#pragma once

#include "pfr/core/types.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace pfr::test {

inline CGrid random_complex(Index rows, Index cols, std::mt19937_64 &rng)
{
  std::normal_distribution<double> n;
  CGrid g(rows, cols);
  for (Index i = 0; i < g.size(); ++i) {
    g.data()[i] = Complex(n(rng), n(rng));
  }
  return g;
}

inline RGrid random_real(Index rows, Index cols, std::mt19937_64 &rng, double lo = 0.0, double hi = 1.0)
{
  std::uniform_real_distribution<double> u(lo, hi);
  RGrid g(rows, cols);
  for (Index i = 0; i < g.size(); ++i) {
    g.data()[i] = u(rng);
  }
  return g;
}

// Textbook O(N^4) centered orthonormal DFT; DC sits at (floor(H/2), floor(W/2)).
inline CGrid naive_dft(CGrid const &x, bool inverse)
{
  Index const h = x.rows(), w = x.cols();
  double const sgn = inverse ? 1.0 : -1.0;
  CGrid out(h, w);
  for (Index u = 0; u < h; ++u) {
    for (Index v = 0; v < w; ++v) {
      Complex acc = 0;
      for (Index r = 0; r < h; ++r) {
        for (Index c = 0; c < w; ++c) {
          double const a = 2.0 * std::numbers::pi *
                           (static_cast<double>((u - h / 2) * (r - h / 2)) / static_cast<double>(h) +
                            static_cast<double>((v - w / 2) * (c - w / 2)) / static_cast<double>(w));
          acc += x(r, c) * std::polar(1.0, sgn * a);
        }
      }
      out(u, v) = acc / std::sqrt(static_cast<double>(h * w));
    }
  }
  return out;
}

// Real, non-negative blocky image: a few random rectangles on a disc.
inline RGrid blocky_real(Index rows, Index cols, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RGrid g = RGrid::Zero(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      double const dr = (r - rows / 2.0) / (0.42 * rows), dc = (c - cols / 2.0) / (0.38 * cols);
      if (dr * dr + dc * dc <= 1.0) { g(r, c) = 0.4; }
    }
  }
  for (int k = 0; k < 4; ++k) {
    Index const r0 = static_cast<Index>(u(rng) * rows * 0.6 + rows * 0.15);
    Index const c0 = static_cast<Index>(u(rng) * cols * 0.6 + cols * 0.15);
    Index const hr = 2 + static_cast<Index>(u(rng) * rows * 0.15), hc = 2 + static_cast<Index>(u(rng) * cols * 0.15);
    double const v = 0.2 + 0.8 * u(rng);
    g.block(r0, c0, std::min(hr, rows - r0), std::min(hc, cols - c0)) = v;
  }
  return g;
}

inline double max_abs(CGrid const &a, CGrid const &b) { return (a - b).abs().maxCoeff(); }

} // namespace pfr::test
