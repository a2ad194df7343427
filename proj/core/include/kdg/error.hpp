#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kdg {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Raised by topological sorting when the oriented cell graph is not acyclic.
class CycleError : public Error {
 public:
  CycleError(const std::string& what, std::vector<int> cycle)
      : Error(what), cycle_(std::move(cycle)) {}

  /// Cells forming one directed cycle, in traversal order.
  const std::vector<int>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<int> cycle_;
};

}  // namespace kdg
