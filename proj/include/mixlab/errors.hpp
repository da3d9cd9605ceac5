#pragma once

#include <stdexcept>
#include <string>

namespace mixlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model violates one of its own construction constraints.
class ModelError : public Error {
 public:
  using Error::Error;
};

#define MIXLAB_DEFINE_ERROR(Name, Base)   \
  class Name : public Base {              \
   public:                                \
    using Base::Base;                     \
  }

MIXLAB_DEFINE_ERROR(DomainError, Error);
MIXLAB_DEFINE_ERROR(BoundaryPoint, Error);
MIXLAB_DEFINE_ERROR(InadmissibleItinerary, Error);
MIXLAB_DEFINE_ERROR(NoReturn, Error);
MIXLAB_DEFINE_ERROR(InsufficientDepth, Error);
MIXLAB_DEFINE_ERROR(FiberEscape, ModelError);
MIXLAB_DEFINE_ERROR(DepthOverflow, Error);
MIXLAB_DEFINE_ERROR(BinMisalignment, Error);
MIXLAB_DEFINE_ERROR(NoConvergence, Error);
MIXLAB_DEFINE_ERROR(WindowTooShort, Error);
MIXLAB_DEFINE_ERROR(BracketUndefined, Error);
MIXLAB_DEFINE_ERROR(GeometryViolation, ModelError);
MIXLAB_DEFINE_ERROR(ProtectedOrbitHit, Error);
MIXLAB_DEFINE_ERROR(ExactOverflow, Error);

#undef MIXLAB_DEFINE_ERROR

/// Configuration problems carry the offending key and line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, int line, const std::string& what)
      : Error(format(key, line, what)), key_(key), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& what) {
    std::string msg = "config error";
    if (line > 0) msg += " at line " + std::to_string(line);
    if (!key.empty()) msg += " (key '" + key + "')";
    return msg + ": " + what;
  }

  std::string key_;
  int line_;
};

}  // namespace mixlab
