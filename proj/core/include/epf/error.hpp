#pragma once

#include <stdexcept>
#include <string>

namespace epf {

// Every failure raised by the library derives from Error. The CLI maps the
// three categories onto exit codes 1 (config), 2 (data) and 3 (numeric).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace epf
