#pragma once

#include <stdexcept>
#include <string>

namespace sld {

/// Invalid parameters or configuration; the CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure during integration (blow-up, NaN, hard negative density).
/// The CLI maps this to exit code 3.
class SolverAbort : public std::runtime_error {
public:
  explicit SolverAbort(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace sld
