#pragma once

#include <stdexcept>
#include <string>

namespace greenlab {

/// Base class for every error the library raises on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// numerics
struct NonConvergence : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct DivergentTail : Error { using Error::Error; };
struct NoSignChange : Error { using Error::Error; };
struct StepUnderflow : Error { using Error::Error; };

// manifold catalog
struct BadDimension : Error { using Error::Error; };
struct NonPositiveSlope : Error { using Error::Error; };
struct ParabolicRange : Error { using Error::Error; };
struct NotSublinear : Error { using Error::Error; };

// profile construction and evaluation
struct Parabolic : Error { using Error::Error; };
struct DegenerateF : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct TailDivergence : Error { using Error::Error; };

// monotonicity machinery
struct DivergentAtPole : Error { using Error::Error; };
struct AssumptionFails : Error { using Error::Error; };
struct WeightRatioViolated : Error { using Error::Error; };
struct HypothesisNotMet : Error { using Error::Error; };

// configuration
struct ParseError : Error { using Error::Error; };
struct UnknownCheck : Error { using Error::Error; };
struct BadGrid : Error { using Error::Error; };

} // namespace greenlab
