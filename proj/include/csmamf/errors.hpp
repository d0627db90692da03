#pragma once

#include <stdexcept>
#include <string>

namespace csmamf {

// Invalid or inconsistent user input (config files, parameter vectors).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A requested target lies outside the feasible region (e.g. load outside
// the interior of the capacity region, or no equilibrium exists).
class InfeasibleError : public std::runtime_error {
public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical procedure failed to meet its contract (non-convergence,
// iteration caps, degenerate pivots).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace csmamf
