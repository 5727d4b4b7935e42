#include "pfr/io/binary.hpp"
#include "pfr/error.hpp"

#include <fstream>
#include <iterator>

namespace pfr::io {

std::vector<char> read_file(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw IoError("cannot open '" + path + "' for reading"); }
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(std::string const &path, std::vector<char> const &bytes)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) { throw IoError("cannot open '" + path + "' for writing"); }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) { throw IoError("failed writing '" + path + "'"); }
}

} // namespace pfr::io
