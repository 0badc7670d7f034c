#pragma once

#include <stdexcept>
#include <string>

namespace icsim {

// Base for every error raised by the library. Callers that only need a
// message can catch this; stages map it to a nonzero exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: violated precondition, malformed file, out-of-range value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A required file or prior-stage artifact does not exist.
class MissingArtifact : public Error {
 public:
  using Error::Error;
};

// Configuration that parses but cannot be run (bad weights, every model excluded...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class ProviderErrorKind { kPrecondition, kAuthentication, kTimeout, kExhausted, kBadResponse };

class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  ProviderErrorKind kind() const noexcept { return kind_; }

 private:
  ProviderErrorKind kind_;
};

}  // namespace icsim
