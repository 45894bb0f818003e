#pragma once

#include <stdexcept>
#include <string>

namespace relaynet {

enum class ErrorKind {
  invalid_scenario,
  degenerate_input,
  no_path,
  no_tree,
  budget_exceeded,
  not_a_tree,
  no_solution,
  out_of_closed_form,
  parse_error,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace relaynet
