#pragma once

#include <stdexcept>
#include <string>

namespace imgclust {

// Bad input or configuration detected before any work is done.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Failure while executing a stage (I/O, child process, corrupt artifact).
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lookup of a project, round, cluster or image that does not exist.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace imgclust
