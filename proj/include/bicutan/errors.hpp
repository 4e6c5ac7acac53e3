#pragma once

#include <stdexcept>
#include <string>

namespace bicutan {

/// Invalid or inconsistent configuration (network geometry, scenario, CLI arguments).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed external data, e.g. an observation CSV row.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Preconditions of a statistical routine were not met.
class StatsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A replication was aborted because a kernel invariant broke (collision, negative gap).
class SimulationAbort : public std::runtime_error {
 public:
  SimulationAbort(const std::string& what, double sim_time)
      : std::runtime_error(what), sim_time_(sim_time) {}

  double sim_time() const noexcept { return sim_time_; }

 private:
  double sim_time_;
};

}  // namespace bicutan
