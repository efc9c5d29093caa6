#pragma once

#include <stdexcept>
#include <string>

namespace jnr {

// Base class for everything thrown by this library. The CLI maps subclasses
// onto exit codes: parse/user errors -> 2, validation errors -> 3,
// numerical failures -> 4.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class NotHermitianError : public Error {
public:
  using Error::Error;
};

class BadDimError : public Error {
public:
  using Error::Error;
};

class NotNormalizedError : public Error {
public:
  using Error::Error;
};

class NoConvergenceError : public Error {
public:
  using Error::Error;
};

class NotSwapSymmetricError : public Error {
public:
  using Error::Error;
};

class NotHomogeneousError : public Error {
public:
  using Error::Error;
};

class EmptyCloudError : public Error {
public:
  using Error::Error;
};

class DegenerateSliceError : public Error {
public:
  using Error::Error;
};

class OutOfDomainError : public Error {
public:
  using Error::Error;
};

class BadIndexError : public Error {
public:
  using Error::Error;
};

class NotFoundError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

} // namespace jnr
