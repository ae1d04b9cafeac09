#pragma once

#include <stdexcept>
#include <string>

namespace confmod {

/// Base class for all confmod errors. `code()` is a stable machine-readable
/// identifier used by the CLI when emitting structured error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct InvalidSpec : Error {
    explicit InvalidSpec(const std::string& msg) : Error("InvalidSpec", msg) {}
};
struct RatioMismatch : Error {
    explicit RatioMismatch(const std::string& msg) : Error("RatioMismatch", msg) {}
};
struct CapExceeded : Error {
    explicit CapExceeded(const std::string& msg) : Error("CapExceeded", msg) {}
};
struct ZeroMass : Error {
    explicit ZeroMass(const std::string& msg) : Error("ZeroMass", msg) {}
};
struct BadExponent : Error {
    explicit BadExponent(const std::string& msg) : Error("BadExponent", msg) {}
};
struct RadiusOutOfRange : Error {
    explicit RadiusOutOfRange(const std::string& msg) : Error("RadiusOutOfRange", msg) {}
};
struct BallsOverlap : Error {
    explicit BallsOverlap(const std::string& msg) : Error("BallsOverlap", msg) {}
};
struct GraphMismatch : Error {
    explicit GraphMismatch(const std::string& msg) : Error("GraphMismatch", msg) {}
};
struct EmptyFamily : Error {
    explicit EmptyFamily(const std::string& msg) : Error("EmptyFamily", msg) {}
};
struct InsufficientLevels : Error {
    explicit InsufficientLevels(const std::string& msg) : Error("InsufficientLevels", msg) {}
};
struct BracketFailure : Error {
    explicit BracketFailure(const std::string& msg) : Error("BracketFailure", msg) {}
};
struct CacheError : Error {
    explicit CacheError(const std::string& msg) : Error("CacheError", msg) {}
};

/// Convex solver gave up before reaching the requested tolerance. Carries the
/// best primal/dual bounds found so the caller can still report partial data.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& msg, double upper, double lower, int iterations)
        : Error("NonConvergence", msg), upper_bound(upper), lower_bound(lower), iterations(iterations) {}
    double upper_bound;
    double lower_bound;
    int iterations;
};

} // namespace confmod
