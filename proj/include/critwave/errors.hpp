#pragma once

#include <stdexcept>
#include <string>

namespace critwave {

/// Invalid input: out-of-range parameter, violated precondition on a value.
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Non-finite numbers appeared before a blow-up threshold was reached.
/// Never to be confused with a genuine blow-up.
class InstabilityError : public std::runtime_error {
public:
    explicit InstabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// The data handed to a checker cannot support the requested evaluation
/// (sampling too coarse, horizon too short).
class PreconditionError : public std::runtime_error {
public:
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

/// Least-squares fit could not be formed (degenerate design, too few points).
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

/// A file could not be opened or does not have the expected layout.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace critwave
