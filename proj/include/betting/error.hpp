#pragma once

#include <stdexcept>
#include <string>

namespace betting {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or violated precondition. CLI exit code 2.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Malformed or out-of-range input data. CLI exit code 3.
class DataError : public Error {
public:
  using Error::Error;
};

// 1 - g*theta <= 0 or a non-finite learner quantity. Always a bug, never a state.
class NumericalError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace betting
