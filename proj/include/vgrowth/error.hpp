#pragma once

#include <stdexcept>
#include <string>

namespace vgrowth {

/// Rejected argument or configuration (bad spec, bad shape, out-of-range value).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File could not be opened, parsed or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An inpainting mask covering every pixel.
class FullCoverage : public InvalidArgument {
 public:
  FullCoverage() : InvalidArgument("inpainting mask covers the whole image") {}
};

}  // namespace vgrowth
