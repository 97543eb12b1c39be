#pragma once

#include <stdexcept>
#include <string>

namespace t4reg {

// Error categories map onto CLI exit codes.
enum class ErrorCategory {
  numerical = 2,
  config = 3,
  io = 4,
  metric = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory cat, const std::string& what) : std::runtime_error(what), cat_(cat) {}
  ErrorCategory category() const noexcept { return cat_; }

 private:
  ErrorCategory cat_;
};

struct NonFiniteState : Error {
  explicit NonFiniteState(const std::string& w) : Error(ErrorCategory::numerical, w) {}
};
struct NoConvergence : Error {
  explicit NoConvergence(const std::string& w) : Error(ErrorCategory::numerical, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCategory::config, w) {}
};
struct DirectoryError : Error {
  explicit DirectoryError(const std::string& w) : Error(ErrorCategory::io, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCategory::io, w) {}
};
struct EmptyList : Error {
  explicit EmptyList(const std::string& w) : Error(ErrorCategory::metric, w) {}
};
struct NotReached : Error {
  explicit NotReached(const std::string& w) : Error(ErrorCategory::metric, w) {}
};
struct NotSettled : Error {
  explicit NotSettled(const std::string& w) : Error(ErrorCategory::metric, w) {}
};

}  // namespace t4reg
