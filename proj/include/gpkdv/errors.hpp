#pragma once

#include <stdexcept>
#include <string>

namespace gpkdv {

// Base of every error thrown by the library. The CLI maps the three
// subclasses onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: preconditions, configuration, unknown names.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A run went non-finite, under-resolved or escaped its window.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, std::string label = {})
      : Error(label.empty() ? what : "[" + label + "] " + what), label_(std::move(label)) {}

  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(what + ": " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace gpkdv
