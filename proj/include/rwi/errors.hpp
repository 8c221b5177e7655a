#pragma once

#include <stdexcept>
#include <string>

namespace rwi {

/// Broad failure classes; the CLI maps these onto process exit codes.
enum class ErrorKind { validation, numerical, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class IndexError : public Error {
 public:
  explicit IndexError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class StabilityError : public Error {
 public:
  explicit StabilityError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class DivergenceError : public Error {
 public:
  DivergenceError(long step, const std::string& what) : Error(ErrorKind::numerical, what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

class SpectralValidityError : public Error {
 public:
  explicit SpectralValidityError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Raised by the block Cholesky factorization; `block()` is the failing pivot block column.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(int block, const std::string& what) : Error(ErrorKind::numerical, what), block_(block) {}
  int block() const noexcept { return block_; }

 private:
  int block_;
};

class SingularMatrix : public Error {
 public:
  explicit SingularMatrix(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace rwi
