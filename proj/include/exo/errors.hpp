#pragma once

#include <stdexcept>
#include <string>

namespace exo {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a formula (angle past 90°, P ≤ 0, ...).
struct DomainError : Error {
  using Error::Error;
};

// Link lengths that cannot form the arm.
struct GeometryError : Error {
  using Error::Error;
};

// Piston length or angle outside the reachable kinematic interval.
struct RangeError : Error {
  using Error::Error;
};

// Non-physical cross-section or member dimensions.
struct DimensionError : Error {
  using Error::Error;
};

struct NoStandardSize : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

// Config value that parses but violates an invariant. `key` is the dotted path.
struct ValidationError : Error {
  ValidationError(std::string key, const std::string& reason)
      : Error(key + ": " + reason), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct UnknownKeyError : Error {
  explicit UnknownKeyError(std::string key)
      : Error("unknown key: " + key), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Simulation inputs that disagree with each other (stroke vs geometry sweep, ...).
struct ConfigInconsistency : Error {
  using Error::Error;
};

}  // namespace exo
