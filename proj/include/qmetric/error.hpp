#pragma once

#include <stdexcept>
#include <string>

namespace qmetric {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed group data: bad Cayley table, wrong element shape, bad generators.
class GroupError : public Error {
 public:
  using Error::Error;
};

/// A query needed an element that lies outside an enumerated ball.
class OutOfBallError : public Error {
 public:
  OutOfBallError(const std::string& what, long required_radius)
      : Error(what), required_radius_(required_radius) {}
  long required_radius() const noexcept { return required_radius_; }

 private:
  long required_radius_;
};

/// A configured size cap was exceeded. Never silently truncated.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Invalid arguments to a numerical routine or an invalid state description.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Experiment or file configuration problems; `path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace qmetric
