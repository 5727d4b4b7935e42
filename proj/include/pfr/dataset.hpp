#pragma once

#include "core/types.hpp"

#include <string>

namespace pfr {

/// Dataset container.
///
/// Header (28 bytes, little endian):
///   0  char[6]  "PFREC1"
///   6  uint16   version (1)
///   8  uint32   H (readout)
///   12 uint32   W (phase encode)
///   16 uint32   B (repetitions per slice)
///   20 uint32   slice count
///   24 float32  PF factor; 1 means fully sampled image-domain data, a value
///               below 1 means PF-sampled centered k-space with that factor
/// Payload: for each slice, B grids of H x W complex values stored row-major
/// as interleaved (real, imag) float32.
struct Dataset
{
  Index height = 0;
  Index width = 0;
  Index repetitions = 0;
  PfFactor pff{1, 1};
  std::vector<std::vector<CGrid>> slices;

  bool presampled() const { return !pff.full(); }

  ImageSet images(std::size_t slice) const;
  KSpaceSet kspace(std::size_t slice) const;
};

inline constexpr std::uint16_t kDatasetVersion = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 28;

void write_dataset(Dataset const &ds, std::string const &path);
Dataset read_dataset(std::string const &path);

/// Builds a dataset from image-domain slices.
Dataset make_dataset(std::vector<ImageSet> const &slices);

} // namespace pfr
