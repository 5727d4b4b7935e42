#pragma once

#include <stdexcept>
#include <string>

namespace pfr {

// Every failure raised by the library carries a short machine-readable code
// (printed by the CLI as `error: <code>: <message>`).
class Error : public std::runtime_error
{
public:
  Error(std::string code, std::string const &message)
    : std::runtime_error(message)
    , code_(std::move(code))
  {
  }

  std::string const &code() const noexcept { return code_; }

private:
  std::string code_;
};

struct InvalidInput : Error
{
  explicit InvalidInput(std::string const &msg)
    : Error("invalid-input", msg)
  {
  }
};

struct ShapeMismatch : Error
{
  explicit ShapeMismatch(std::string const &msg)
    : Error("shape-mismatch", msg)
  {
  }
};

struct UnsupportedFactor : Error
{
  explicit UnsupportedFactor(std::string const &msg)
    : Error("unsupported-factor", msg)
  {
  }
};

struct FormatError : Error
{
  explicit FormatError(std::string const &msg)
    : Error("format-error", msg)
  {
  }
};

struct TruncatedFile : Error
{
  explicit TruncatedFile(std::string const &msg)
    : Error("truncated-file", msg)
  {
  }
};

struct IoError : Error
{
  explicit IoError(std::string const &msg)
    : Error("io-error", msg)
  {
  }
};

struct NumericalError : Error
{
  explicit NumericalError(std::string const &msg)
    : Error("numerical-error", msg)
  {
  }
};

} // namespace pfr
