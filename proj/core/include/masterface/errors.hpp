#ifndef MASTERFACE_ERRORS_HPP_
#define MASTERFACE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace masterface {

// Violated precondition or malformed input: caller bug or bad file.
class StructuralError : public std::runtime_error {
 public:
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical procedure failed to reach its accuracy target.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem or format failure while reading/writing artifacts.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace masterface

#endif  // MASTERFACE_ERRORS_HPP_
