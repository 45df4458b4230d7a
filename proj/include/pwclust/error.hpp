#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pwclust {

/// Error classes. The CLI maps each one to a distinct exit code.
enum class ErrorKind {
  InvalidArgument,  // precondition violated by the caller
  Schema,           // malformed or unsupported input file
  SceneValidation,  // scene violates a model constraint (separation, containment)
  Degenerate,       // data makes the computation undefined (duplicates, isolated vertices, ...)
  Convergence,      // iterative method did not converge
  Io,               // filesystem failure
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::vector<std::size_t> indices = {})
      : std::runtime_error(what), kind_(kind), indices_(std::move(indices)) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Offending element indices, when the error concerns specific points or vertices.
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  ErrorKind kind_;
  std::vector<std::size_t> indices_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what,
                              std::vector<std::size_t> indices = {}) {
  throw Error(kind, what, std::move(indices));
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace pwclust
