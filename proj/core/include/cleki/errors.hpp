#pragma once

#include <stdexcept>
#include <string>

namespace cleki {

// Malformed input files, inconsistent dimensions, violated preconditions.
// The CLI maps this to exit status 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Failures during a run: divergence, corrupt checkpoint. CLI exit status 3.
class RunError : public std::runtime_error {
 public:
  explicit RunError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cleki
