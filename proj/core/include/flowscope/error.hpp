#pragma once

#include <stdexcept>
#include <string>

namespace flowscope {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An id (session, sequence, node, link, task, flow) that does not resolve.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Invalid task definition, fleet configuration or request parameter.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input that cannot be recovered line-by-line (store files, JSON documents).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Statistic requested on data that cannot support it (empty or zero-spread samples).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace flowscope
