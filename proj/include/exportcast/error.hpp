#pragma once

#include <stdexcept>
#include <string>

namespace exportcast {

// Bad data or a failed pipeline stage. Precondition violations on function
// arguments throw std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace exportcast
