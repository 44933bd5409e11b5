#pragma once

#include <stdexcept>
#include <string>

namespace magic {

/// File could not be opened, read or written.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Byte-level container is malformed: bad magic, wrong version, truncation.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace magic
