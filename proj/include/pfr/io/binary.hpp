#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace pfr::io {

// Little-endian encoders for the on-disk formats.

inline void put_u16(std::vector<char> &out, std::uint16_t v)
{
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put_u32(std::vector<char> &out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

inline void put_f32(std::vector<char> &out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

inline std::uint16_t get_u16(char const *p)
{
  auto const *u = reinterpret_cast<unsigned char const *>(p);
  return static_cast<std::uint16_t>(u[0] | (u[1] << 8));
}

inline std::uint32_t get_u32(char const *p)
{
  auto const *u = reinterpret_cast<unsigned char const *>(p);
  return static_cast<std::uint32_t>(u[0]) | (static_cast<std::uint32_t>(u[1]) << 8) |
         (static_cast<std::uint32_t>(u[2]) << 16) | (static_cast<std::uint32_t>(u[3]) << 24);
}

inline float get_f32(char const *p) { return std::bit_cast<float>(get_u32(p)); }

/// Whole-file helpers; throw pfr::IoError.
std::vector<char> read_file(std::string const &path);
void write_file(std::string const &path, std::vector<char> const &bytes);

} // namespace pfr::io
