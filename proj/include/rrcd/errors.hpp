#pragma once

#include <stdexcept>
#include <string>

namespace rrcd {

/// Base of every error the simulator raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Invalid configuration, malformed input file or bad CLI argument.
class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

/// Malformed compressed-register encoding.
class DecodeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "decode"; }
};

/// A hardware unit was driven out of its protocol (e.g. blocks out of order).
class ProtocolError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "protocol"; }
};

/// Architectural or structural failure during simulation (read before write,
/// spill exhaustion, port over-subscription, faulty-block write in strict mode).
class SimulationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "simulation"; }
};

}  // namespace rrcd
