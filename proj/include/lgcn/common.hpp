#pragma once

#include <stdexcept>
#include <string>

namespace lgcn {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or malformed input data. The CLI maps this to exit
// code 2, everything else to 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace lgcn
