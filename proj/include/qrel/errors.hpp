#pragma once

#include <stdexcept>
#include <string>

namespace qrel {

/// Bad caller-supplied data: malformed log lines, unknown dimensions,
/// non-normalized vectors. Maps to exit code 1 in the CLI.
class InputError : public std::runtime_error {
  public:
    explicit InputError(const std::string &what) : std::runtime_error(what) {}
};

/// A broken internal invariant. Maps to exit code 2 in the CLI.
class InternalError : public std::logic_error {
  public:
    explicit InternalError(const std::string &what) : std::logic_error(what) {}
};

} // namespace qrel
