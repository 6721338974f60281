#pragma once

#include <stdexcept>
#include <string>

namespace qk {

// Error codes double as the CLI's machine-readable error tag.
enum class ErrorCode {
    invalid_argument,
    out_of_box,
    divergence,
    not_converged,
    inconsistent,
    parse_error,
    config_error,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& what) : Error(ErrorCode::invalid_argument, what) {}
};

// Evaluation point outside the region where a truncation is certified.
struct OutOfBox : Error {
    explicit OutOfBox(const std::string& what) : Error(ErrorCode::out_of_box, what) {}
};

// An integral or series that does not converge (e.g. a non-convolvable pair).
struct Divergence : Error {
    explicit Divergence(const std::string& what) : Error(ErrorCode::divergence, what) {}
};

// An iterative refinement ran out of budget before reaching its target.
struct NotConverged : Error {
    explicit NotConverged(const std::string& what) : Error(ErrorCode::not_converged, what) {}
};

// Two independent computations of the same quantity disagree.
struct Inconsistent : Error {
    explicit Inconsistent(const std::string& what) : Error(ErrorCode::inconsistent, what) {}
};

// Malformed key=value configuration: unknown keys, bad values, nonpositive tolerances.
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorCode::config_error, what) {}
};

}  // namespace qk
