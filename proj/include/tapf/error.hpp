#pragma once

#include <stdexcept>
#include <string>

namespace tapf {

/// Malformed input: bad vertex ids, invalid actions, unreadable files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Solver or generator configured with values it cannot honour.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An instance cannot be turned into a task (e.g. timers that round to zero).
class CompileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tapf
