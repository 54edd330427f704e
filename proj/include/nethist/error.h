#ifndef NETHIST_ERROR_H_
#define NETHIST_ERROR_H_

#include <stdexcept>
#include <string>

namespace nethist {

// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  kNumerical = 1,  // procedural failure, e.g. bandwidth undefined
  kIo = 2,
  kConfig = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::kNumerical, what) {}
};

}  // namespace nethist

#endif  // NETHIST_ERROR_H_
