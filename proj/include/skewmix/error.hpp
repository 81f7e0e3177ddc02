#pragma once

#include <stdexcept>
#include <string>

namespace skewmix {

// Base of every error thrown by the library. The C API maps each subclass to
// a distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter violates its invariants (non-PD matrix, skewness outside the
// support, bad hyperparameter, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// A computation produced no usable value, e.g. every assignment probability
// of an observation underflowed.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// Every importance weight of a particle cloud is zero.
class DegenerateCloud : public Error {
 public:
  DegenerateCloud(int cluster, const std::string& what)
      : Error(what), cluster_(cluster) {}
  int cluster() const noexcept { return cluster_; }

 private:
  int cluster_;
};

// Malformed tabular input or configuration.
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace skewmix
