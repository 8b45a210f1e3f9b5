#ifndef CREACH_ERRORS_HPP
#define CREACH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace creach {

/// Base class for all errors thrown by this library.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments, malformed files, violated preconditions.
class validation_error : public error {
public:
  using error::error;
};

/// Numerical failures: singular factorizations, diverging integrations.
class numeric_error : public error {
public:
  using error::error;
};

} // namespace creach

#endif
