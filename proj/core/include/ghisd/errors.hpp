#pragma once

#include <stdexcept>
#include <string>

namespace ghisd {

/// Violated call contract (dimension mismatch, bad argument).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation not supported by this object (e.g. energy of a non-gradient system).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A stated precondition does not hold at runtime (e.g. point not stationary).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gram-Schmidt hit a (numerically) rank-deficient column.
class DegenerateFrameError : public std::runtime_error {
 public:
  DegenerateFrameError(int column, double residual_norm)
      : std::runtime_error("degenerate frame: column " + std::to_string(column) +
                           " has post-projection norm " + std::to_string(residual_norm)),
        column_(column),
        residual_norm_(residual_norm) {}

  int column() const { return column_; }
  double residual_norm() const { return residual_norm_; }

 private:
  int column_;
  double residual_norm_;
};

/// Bad user input (config file, plan, CLI state file).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace ghisd
