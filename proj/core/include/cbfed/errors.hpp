#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cbfed {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroResolution : Error { using Error::Error; };
struct EmptySpace : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct InvalidExponent : Error { using Error::Error; };
struct DegenerateRange : Error { using Error::Error; };
struct StepTooLarge : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };
struct NoBoundaryDofs : Error { using Error::Error; };
struct DimensionTooLarge : Error { using Error::Error; };
struct NotContractive : Error { using Error::Error; };
struct BoundViolated : Error { using Error::Error; };
struct BadConfig : Error { using Error::Error; };

/// Thrown when an iterative solver exhausts its iteration budget.  The best
/// iterate found so far is carried along so callers can still inspect it.
struct MaxIterExceeded : Error {
    MaxIterExceeded(const std::string& what, std::vector<double> best)
        : Error(what), best_iterate(std::move(best)) {}
    std::vector<double> best_iterate;
};

} // namespace cbfed
