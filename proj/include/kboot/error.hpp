#pragma once

#include <stdexcept>
#include <string>

namespace kboot {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grid sizes too small or mismatched between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter lies outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The ACS block does not fit inside the line budget of a sampling mask.
class InfeasibleBudgetError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// Image sides incompatible with the wavelet depth and padding disabled.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid aggregation weights or branch settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents. Carries the byte offset at which parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& detail, std::size_t offset)
      : Error(detail + " (at byte offset " + std::to_string(offset) + ")"),
        detail_(detail),
        offset_(offset) {}

  const std::string& detail() const noexcept { return detail_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string detail_;
  std::size_t offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kboot
