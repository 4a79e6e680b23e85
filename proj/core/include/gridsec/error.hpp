#pragma once

#include <stdexcept>
#include <string>

namespace gridsec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid network data or references to elements that do not exist.
class ModelError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : Error(what), iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

// Gain matrix singular or measurement set too small for the state.
class ObservabilityError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridsec
