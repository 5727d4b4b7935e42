#pragma once

#include "unrolled.hpp"

#include <filesystem>

namespace pfr::net {

/// On-disk model container.
///
///   bytes 0-7   magic "PFRNET01"
///   bytes 8-11  header length N (uint32, little endian)
///   N bytes     UTF-8 JSON header:
///                 {"strategy","K","G","F","aggregation","pff","lambda",
///                  "tensors":[{"name","shape"}...]}
///   payload     every tensor in header order as little-endian float32,
///               row-major in its declared shape
struct Checkpoint
{
  NetworkConfig config;
  PfFactor pff;
};

template <typename T>
void save_checkpoint(std::filesystem::path const &path, UnrolledNetwork<T> const &net, PfFactor pff);

/// Reads the header only.
Checkpoint read_checkpoint_header(std::filesystem::path const &path);

/// Builds a network matching the stored configuration and loads its weights.
template <typename T>
UnrolledNetwork<T> load_checkpoint(std::filesystem::path const &path, Checkpoint *meta = nullptr);

} // namespace pfr::net
