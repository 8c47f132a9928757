#pragma once

#include <cmath>

namespace greenlab::testing {

/// |a - b| <= tol * (1 + max(|a|, |b|)): relative with an absolute floor.
inline bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

/// strictly relative comparison, for quantities known to be away from zero
inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

} // namespace greenlab::testing
