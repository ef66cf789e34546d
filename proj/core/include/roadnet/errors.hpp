#ifndef ROADNET_ERRORS_HPP
#define ROADNET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace roadnet {

// Bad arguments / violated preconditions on the API surface.
struct InvariantError : std::invalid_argument {
  explicit InvariantError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed or missing input data (files, schemas, panels).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Command-line misuse; maps to exit code 1 in the CLI.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace roadnet

#endif
