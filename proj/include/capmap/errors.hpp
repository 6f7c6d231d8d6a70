#pragma once

#include <stdexcept>
#include <string>

namespace capmap {

// Exit-code classes used by the command line front end.
enum class ErrorKind { Usage = 1, Validation = 2, NoPlan = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

// Evidence with zero probability under the model.
class ImpossibleEvidence : public Error {
 public:
  explicit ImpossibleEvidence(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

}  // namespace capmap
