#pragma once

#include <stdexcept>
#include <string>

namespace evflex {

// Bad or missing input data / configuration. CLI exit code 3.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A model that cannot be satisfied (LP infeasible/unbounded). CLI exit code 2.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace evflex
