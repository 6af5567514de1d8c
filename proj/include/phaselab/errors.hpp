#pragma once

#include <stdexcept>
#include <string>

namespace phaselab {

// Thrown when a request exceeds a documented feasibility bound
// (enumeration sizes, sequence counts).  The message names the bound.
class resource_limit_error : public std::runtime_error {
  public:
    explicit resource_limit_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a numeric procedure cannot deliver its accuracy contract
// (eigensolver non-convergence and similar).
class numeric_error : public std::runtime_error {
  public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace phaselab
