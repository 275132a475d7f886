#pragma once

#include <stdexcept>
#include <string>

namespace pgvlab {

enum class ErrorKind {
  shape,
  contract,
  numeric,
  degenerate,
  config,
  io,
  interrupted,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Dimension mismatch between tensors, parameter layouts or environment spaces.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::shape, what) {}
};

// Caller violated a precondition (stepping a finished episode, bad token, ...).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(ErrorKind::contract, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

// Input is well-formed but carries no usable signal (e.g. every parameter excluded).
class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& what) : Error(ErrorKind::degenerate, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

// A run was stopped by request before it finished.
class InterruptedError : public Error {
 public:
  explicit InterruptedError(const std::string& what) : Error(ErrorKind::interrupted, what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

inline void require_shape(bool condition, const std::string& message) {
  if (!condition) throw ShapeError(message);
}

}  // namespace pgvlab
