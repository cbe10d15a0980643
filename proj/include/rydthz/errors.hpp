#ifndef RYDTHZ_ERRORS_HPP
#define RYDTHZ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rydthz {

/// Invalid or inconsistent configuration input (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Physics or solver failure: degenerate steady state, non-passive medium,
/// integrator breakdown, propagation of non-finite values (CLI exit code 3).
class PhysicsError : public std::runtime_error {
 public:
  explicit PhysicsError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Not enough data to form an estimate: empty photon stream, too few
/// occupied bins, curve below the noise floor (CLI exit code 4).
class InsufficientDataError : public std::runtime_error {
 public:
  explicit InsufficientDataError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace rydthz

#endif  // RYDTHZ_ERRORS_HPP
