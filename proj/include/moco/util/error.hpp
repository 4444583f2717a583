#pragma once

#include <stdexcept>
#include <string>

namespace moco {

// Exit codes used by the CLI and mirrored by the error hierarchy.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitNumeric = 3,
};

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent input data, file formats, configs.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: non-finite values, degenerate softmax, failed checks.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace moco
