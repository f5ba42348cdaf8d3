#pragma once

#include <stdexcept>
#include <string>

namespace dsmm {

// Base class for every error raised by the library. Protocol aborts and
// attack outcomes are values, not exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value outside the admissible range of an operation (plaintext >= N, trust
// coefficient outside [0,1], ...).
class RangeError : public Error {
 public:
  using Error::Error;
};

// Ciphertexts or keys from different key pairs were mixed.
class KeyMismatchError : public Error {
 public:
  using Error::Error;
};

// Bad parameters: out-of-range sizes, violated modulus hypotheses, bounds.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Key generation could not find a suitable modulus.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// Trust pairs from different rings, or pair ciphers under distinct keys.
class AlgebraError : public Error {
 public:
  using Error::Error;
};

// Inconsistent network or protocol configuration.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// A message addressed to or from a player the network does not know.
class RoutingError : public Error {
 public:
  using Error::Error;
};

// Malformed JSON documents (keys, instances, scenarios).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsmm
