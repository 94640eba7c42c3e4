#pragma once

#include <stdexcept>
#include <string>

namespace skyway {

// Bad argument to a primitive (degenerate corridor, slot count out of range...).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Scene or swarm description that violates a domain invariant.
class InvalidScene : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NotFound : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Energy model lookup failed (missing slot, malformed wind table).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InfeasibleAction : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NoRoute : public std::runtime_error {
public:
  NoRoute(const std::string& what, std::string frontier)
      : std::runtime_error(what), frontier_(std::move(frontier)) {}

  // Human-readable summary of how far the search got.
  const std::string& frontier() const noexcept { return frontier_; }

private:
  std::string frontier_;
};

class SimulationFault : public std::runtime_error {
public:
  SimulationFault(const std::string& drone, double time)
      : std::runtime_error("battery depleted: drone " + drone + " at t=" + std::to_string(time)),
        drone_(drone), time_(time) {}

  const std::string& drone() const noexcept { return drone_; }
  double time() const noexcept { return time_; }

private:
  std::string drone_;
  double time_;
};

}  // namespace skyway
