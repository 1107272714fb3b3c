#pragma once

#include <stdexcept>
#include <string>

namespace topokit {

// Invalid arguments and violated preconditions are reported with
// std::invalid_argument. The two classes below cover failures that callers
// (the CLI in particular) need to tell apart from configuration mistakes.

// A file could not be opened, read, written or parsed.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A computation produced a non-finite value or failed to converge.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace topokit
