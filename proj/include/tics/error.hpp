#pragma once

#include <stdexcept>
#include <string>

namespace tics {

/// Base for every error raised by the control system library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A slave clock was read before it was ever given the array time.
class NotSynchronized : public Error {
 public:
  using Error::Error;
};

/// The configuration database (or a scenario file) failed validation.
/// `path()` names the offending element, e.g. `devices[2].properties[0].rca`.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class NameNotFound : public Error {
 public:
  using Error::Error;
};

/// The caller broke an API contract (double release, alarm without monitor...).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A value does not fit the declared range or the register it is encoded into.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A polled device never answered.
class TimeoutError : public Error {
 public:
  using Error::Error;
};

/// A bus transaction was started while the previous one was still in flight.
class BusBusy : public Error {
 public:
  using Error::Error;
};

/// Scheduled bus traffic does not fit inside a timing period.
class Overcommitted : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tics
