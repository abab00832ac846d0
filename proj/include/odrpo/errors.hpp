#pragma once

#include <stdexcept>
#include <string>

namespace odrpo {

// Shared denominator guard for mean/stddev normalizations.
inline constexpr double kEps = 1e-8;

// Bad input: malformed CSV, off-scale reward, invalid construction.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mean normalization requested on a group whose |mean| <= eps.
struct MeanTooSmallError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Enumeration guard tripped (curl scans, exact expectations).
struct TooLargeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Concordance denominator is zero: every rater scored all responses equally.
struct DegenerateMatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace odrpo
