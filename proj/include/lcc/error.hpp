#pragma once

#include <stdexcept>
#include <string>

namespace lcc {

enum class ErrorKind {
  invalid_dimension,
  invalid_argument,
  unknown_vertex,
  degenerate_codeword,
  search_space_too_large,
  incomplete_dag,
  schema,
  invariant,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::unknown_vertex: return "unknown-vertex";
    case ErrorKind::degenerate_codeword: return "degenerate-codeword";
    case ErrorKind::search_space_too_large: return "search-space-too-large";
    case ErrorKind::incomplete_dag: return "incomplete-dag";
    case ErrorKind::schema: return "schema";
    case ErrorKind::invariant: return "invariant";
  }
  return "unknown";
}

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lcc
