#pragma once

#include <stdexcept>
#include <string>

namespace gsmd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or argument lies outside the set an operation is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// An explicit step size exceeds the cap of the algorithm it was given to.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// The noise sampler produced a perturbation larger than sigma allows.
class NoiseError : public Error {
 public:
  using Error::Error;
};

/// Not enough information in the data for a fit or slope.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& key, const std::string& what)
      : Error("line " + std::to_string(line) + (key.empty() ? "" : " [" + key + "]") +
              ": " + what),
        line_(line),
        key_(key) {}
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gsmd
