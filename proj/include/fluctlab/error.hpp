#pragma once

#include <stdexcept>
#include <string>

namespace fluctlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on user-supplied parameters was violated.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// A TASEP replica was invalidated because edge effects reached observed sites.
class WindowBreach : public Error {
public:
  using Error::Error;
};

/// Height/current parity failed; indicates an internal bug.
class ParityError : public Error {
public:
  using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

} // namespace detail
} // namespace fluctlab
