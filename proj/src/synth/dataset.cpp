#include "pfr/dataset.hpp"
#include "pfr/core/model.hpp"
#include "pfr/error.hpp"
#include "pfr/io/binary.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace pfr {

namespace {
constexpr char kMagic[6] = {'P', 'F', 'R', 'E', 'C', '1'};
}

ImageSet Dataset::images(std::size_t slice) const
{
  if (presampled()) { throw InvalidInput("dataset holds PF-sampled k-space, not images"); }
  ImageSet out;
  for (auto const &g : slices.at(slice)) {
    out.emplace_back(g);
  }
  return out;
}

KSpaceSet Dataset::kspace(std::size_t slice) const
{
  if (!presampled()) { throw InvalidInput("dataset holds images, not PF-sampled k-space"); }
  SamplingMask const mask(width, pff);
  KSpaceSet out;
  for (auto const &g : slices.at(slice)) {
    out.emplace_back(g, mask);
  }
  return out;
}

Dataset make_dataset(std::vector<ImageSet> const &slices)
{
  if (slices.empty()) { throw InvalidInput("no slices to store"); }
  Dataset ds;
  ds.height = slices.front().front().rows();
  ds.width = slices.front().front().cols();
  ds.repetitions = static_cast<Index>(slices.front().size());
  for (auto const &s : slices) {
    validate_set(s);
    if (static_cast<Index>(s.size()) != ds.repetitions || s.front().rows() != ds.height || s.front().cols() != ds.width) {
      throw ShapeMismatch("slices differ in shape or repetition count");
    }
    std::vector<CGrid> grids;
    for (auto const &img : s) {
      grids.push_back(img.data());
    }
    ds.slices.push_back(std::move(grids));
  }
  return ds;
}

void write_dataset(Dataset const &ds, std::string const &path)
{
  for (auto const &s : ds.slices) {
    if (static_cast<Index>(s.size()) != ds.repetitions) { throw ShapeMismatch("slice with wrong repetition count"); }
    for (auto const &g : s) {
      if (g.rows() != ds.height || g.cols() != ds.width) { throw ShapeMismatch("grid with wrong shape"); }
    }
  }
  std::vector<char> bytes(kMagic, kMagic + 6);
  bytes.reserve(kDatasetHeaderBytes + ds.slices.size() * ds.repetitions * ds.height * ds.width * 8);
  io::put_u16(bytes, kDatasetVersion);
  io::put_u32(bytes, static_cast<std::uint32_t>(ds.height));
  io::put_u32(bytes, static_cast<std::uint32_t>(ds.width));
  io::put_u32(bytes, static_cast<std::uint32_t>(ds.repetitions));
  io::put_u32(bytes, static_cast<std::uint32_t>(ds.slices.size()));
  io::put_f32(bytes, static_cast<float>(ds.pff.value()));
  for (auto const &s : ds.slices) {
    for (auto const &g : s) {
      for (Index i = 0; i < g.size(); ++i) {
        io::put_f32(bytes, static_cast<float>(g.data()[i].real()));
        io::put_f32(bytes, static_cast<float>(g.data()[i].imag()));
      }
    }
  }
  io::write_file(path, bytes);
}

Dataset read_dataset(std::string const &path)
{
  auto const bytes = io::read_file(path);
  if (bytes.size() < kDatasetHeaderBytes) {
    throw TruncatedFile(fmt::format("'{}': header needs {} bytes, file has {}", path, kDatasetHeaderBytes, bytes.size()));
  }
  if (!std::equal(kMagic, kMagic + 6, bytes.begin())) { throw FormatError(fmt::format("'{}': bad magic", path)); }
  auto const version = io::get_u16(bytes.data() + 6);
  if (version != kDatasetVersion) {
    throw FormatError(fmt::format("'{}': unsupported version {} (expected {})", path, version, kDatasetVersion));
  }
  Dataset ds;
  ds.height = io::get_u32(bytes.data() + 8);
  ds.width = io::get_u32(bytes.data() + 12);
  ds.repetitions = io::get_u32(bytes.data() + 16);
  std::size_t const count = io::get_u32(bytes.data() + 20);
  float const pff = io::get_f32(bytes.data() + 24);
  if (!(pff > 0.5f && pff <= 1.0f)) { throw FormatError(fmt::format("'{}': invalid PF factor {}", path, pff)); }
  ds.pff = PfFactor::from_double(pff);
  std::size_t const expected = kDatasetHeaderBytes + count * static_cast<std::size_t>(ds.repetitions * ds.height * ds.width) * 8;
  if (bytes.size() < expected) {
    throw TruncatedFile(fmt::format("'{}': expected {} bytes, found {}", path, expected, bytes.size()));
  }
  if (bytes.size() > expected) {
    throw FormatError(fmt::format("'{}': expected {} bytes, found {} (trailing data)", path, expected, bytes.size()));
  }
  char const *p = bytes.data() + kDatasetHeaderBytes;
  ds.slices.resize(count);
  for (auto &s : ds.slices) {
    for (Index b = 0; b < ds.repetitions; ++b) {
      CGrid g(ds.height, ds.width);
      for (Index i = 0; i < g.size(); ++i, p += 8) {
        g.data()[i] = Complex(io::get_f32(p), io::get_f32(p + 4));
      }
      s.push_back(std::move(g));
    }
  }
  return ds;
}

} // namespace pfr
