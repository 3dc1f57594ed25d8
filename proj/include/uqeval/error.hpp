#pragma once

#include <stdexcept>
#include <string>

namespace uqeval {

// Base for every failure raised by the library. The CLI maps these to exit
// code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file content. The message carries "path:line: ..." context.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Invariant or precondition violation on otherwise well-formed data.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Sample-id sets of two inputs do not match.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace uqeval
