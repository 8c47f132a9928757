#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "greenlab/errors.hpp"
#include "greenlab/numerics.hpp"

// Rotationally symmetric warped products dr^2 + f(r)^2 g_N: the built-in
// catalog (euclidean, cone, perturbed cone, sublinear growth), custom warpings
// through the same evaluator contract, and validation including the
// nonparabolicity certificate.

namespace greenlab {

/// A warping function together with its first two derivatives and the
/// asymptotic metadata needed to close improper integrals analytically.
struct WarpingFunction {
    std::function<double(double)> f;  // length
    std::function<double(double)> f1; // dimensionless
    std::function<double(double)> f2; // 1/length
    double alpha = 1.0;               // f ~ r^alpha up to bounded factors
    bool origin_smooth = false;       // f(0) = 0 and f'(0) = 1
    double tail_c0 = 1.0;             // constant of the polynomial growth sandwich
    std::vector<double> breakpoints;  // radii where f is only C^2 (quadrature knots)
};

/// volume of the unit (n-1)-sphere
inline double unit_sphere_area(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

struct ManifoldSpec {
    int n = 3;
    WarpingFunction warping;
    double cross_volume = 0.0; // volume of (N, g_N)
    std::string label;
};

struct ValidationReport {
    bool origin_ok = false;
    bool positivity_ok = false;
    bool derivative_consistency_ok = false;
    bool nonparabolic = false;
    std::vector<std::string> notes;

    bool all_ok() const {
        return origin_ok && positivity_ok && derivative_consistency_ok && nonparabolic;
    }
};

namespace detail {

inline void require_dimension(int n) {
    if (n < 3) throw BadDimension("dimension must be at least 3, got " + std::to_string(n));
}

// C^2 bump supported on [1, 2] with |phi|, |phi'|, |phi''| <= 1
// (sup values are 1/64, ~0.054 and 0.375).
inline double bump(double u) {
    if (u <= 1.0 || u >= 2.0) return 0.0;
    const double t = u - 1.0;
    const double s = t * (1.0 - t);
    return s * s * s;
}
inline double bump1(double u) {
    if (u <= 1.0 || u >= 2.0) return 0.0;
    const double t = u - 1.0;
    const double s = t * (1.0 - t);
    return 3.0 * s * s * (1.0 - 2.0 * t);
}
inline double bump2(double u) {
    if (u <= 1.0 || u >= 2.0) return 0.0;
    const double t = u - 1.0;
    const double s = t * (1.0 - t);
    const double d = 1.0 - 2.0 * t;
    return 6.0 * s * (d * d - s);
}

} // namespace detail

inline ManifoldSpec make_euclidean(int n) {
    detail::require_dimension(n);
    ManifoldSpec spec;
    spec.n = n;
    spec.warping.f = [](double r) { return r; };
    spec.warping.f1 = [](double) { return 1.0; };
    spec.warping.f2 = [](double) { return 0.0; };
    spec.warping.alpha = 1.0;
    spec.warping.origin_smooth = true;
    spec.warping.tail_c0 = 1.0;
    spec.cross_volume = unit_sphere_area(n);
    spec.label = "euclidean(n=" + std::to_string(n) + ")";
    return spec;
}

inline ManifoldSpec make_cone(int n, double a) {
    detail::require_dimension(n);
    if (!(a > 0.0)) throw NonPositiveSlope("cone slope must be positive, got " + std::to_string(a));
    ManifoldSpec spec;
    spec.n = n;
    spec.warping.f = [a](double r) { return a * r; };
    spec.warping.f1 = [a](double) { return a; };
    spec.warping.f2 = [](double) { return 0.0; };
    spec.warping.alpha = 1.0;
    spec.warping.origin_smooth = (a == 1.0);
    spec.warping.tail_c0 = std::max(a, 1.0 / a);
    spec.cross_volume = unit_sphere_area(n);
    spec.label = "cone(n=" + std::to_string(n) + ",a=" + std::to_string(a) + ")";
    return spec;
}

/// f(r) = r (1 + r^2)^{(alpha-1)/2}: smooth at the origin, f ~ r^alpha at
/// infinity with sublinear growth up to second order when alpha < 1.
inline ManifoldSpec make_sublinear(int n, double alpha) {
    detail::require_dimension(n);
    if (!(alpha > 1.0 / (n - 1)))
        throw ParabolicRange("alpha = " + std::to_string(alpha) + " <= 1/(n-1): no positive " +
                             "Green function (the warping integral diverges)");
    if (!(alpha < 1.0))
        throw NotSublinear("alpha = " + std::to_string(alpha) + " >= 1 is not sublinear");
    const double e = 0.5 * (alpha - 1.0);
    ManifoldSpec spec;
    spec.n = n;
    spec.warping.f = [e](double r) { return r * std::pow(1.0 + r * r, e); };
    spec.warping.f1 = [e, alpha](double r) {
        const double w = 1.0 + r * r;
        return std::pow(w, e - 1.0) * (1.0 + alpha * r * r);
    };
    spec.warping.f2 = [e, alpha](double r) {
        const double w = 1.0 + r * r;
        return (alpha - 1.0) * r * std::pow(w, e - 2.0) * (3.0 + alpha * r * r);
    };
    spec.warping.alpha = alpha;
    spec.warping.origin_smooth = true;
    spec.warping.tail_c0 = 2.0;
    spec.cross_volume = unit_sphere_area(n);
    spec.label = "sublinear(n=" + std::to_string(n) + ",alpha=" + std::to_string(alpha) + ")";
    return spec;
}

/// Cone of slope a carrying a compactly supported C^2 perturbation
/// f(r) = a r (1 + eps * phi(r/r0)), supp(phi) = [1, 2].
inline ManifoldSpec make_perturbed_cone(int n, double a, double eps, double r0) {
    detail::require_dimension(n);
    if (!(a > 0.0)) throw NonPositiveSlope("cone slope must be positive");
    if (!(eps >= 0.0) || eps >= 1.0)
        throw NonPositiveSlope("perturbation size must lie in [0, 1), got " + std::to_string(eps));
    if (!(r0 > 0.0)) throw Error("perturbation radius must be positive");
    ManifoldSpec spec;
    spec.n = n;
    spec.warping.f = [a, eps, r0](double r) {
        return a * r * (1.0 + eps * detail::bump(r / r0));
    };
    spec.warping.f1 = [a, eps, r0](double r) {
        const double u = r / r0;
        return a * (1.0 + eps * detail::bump(u)) + a * r * eps * detail::bump1(u) / r0;
    };
    spec.warping.f2 = [a, eps, r0](double r) {
        const double u = r / r0;
        return 2.0 * a * eps * detail::bump1(u) / r0 + a * r * eps * detail::bump2(u) / (r0 * r0);
    };
    spec.warping.alpha = 1.0;
    spec.warping.origin_smooth = (a == 1.0);
    spec.warping.tail_c0 = std::max(a, 1.0 / a) * (1.0 + eps);
    spec.warping.breakpoints = {r0, 2.0 * r0};
    spec.cross_volume = unit_sphere_area(n);
    spec.label = "perturbed_cone(n=" + std::to_string(n) + ",a=" + std::to_string(a) +
                 ",eps=" + std::to_string(eps) + ",r0=" + std::to_string(r0) + ")";
    return spec;
}

/// Power-law warping f(r) = coeff * r^alpha, the minimal custom entry
/// addressable from configuration files.  Not smooth at the origin unless
/// alpha = 1 and coeff = 1.
inline ManifoldSpec make_power_custom(int n, double alpha, double coeff = 1.0) {
    detail::require_dimension(n);
    if (!(coeff > 0.0) || !(alpha > 0.0)) throw Error("custom power warping needs c, alpha > 0");
    ManifoldSpec spec;
    spec.n = n;
    spec.warping.f = [coeff, alpha](double r) { return coeff * std::pow(r, alpha); };
    spec.warping.f1 = [coeff, alpha](double r) { return coeff * alpha * std::pow(r, alpha - 1.0); };
    spec.warping.f2 = [coeff, alpha](double r) {
        return coeff * alpha * (alpha - 1.0) * std::pow(r, alpha - 2.0);
    };
    spec.warping.alpha = alpha;
    spec.warping.origin_smooth = (alpha == 1.0 && coeff == 1.0);
    spec.warping.tail_c0 = std::max(coeff, 1.0 / coeff);
    spec.cross_volume = unit_sphere_area(n);
    spec.label = "custom(n=" + std::to_string(n) + ",alpha=" + std::to_string(alpha) +
                 ",c=" + std::to_string(coeff) + ")";
    return spec;
}

/// Audits a spec on a log grid: positivity, origin behaviour, derivative
/// consistency of the supplied evaluators, and the nonparabolicity
/// certificate (declared exponent check confirmed by the tail integral).
inline ValidationReport validate(const ManifoldSpec& spec) {
    ValidationReport report;
    const auto& w = spec.warping;

    report.positivity_ok = spec.cross_volume > 0.0 && spec.n >= 3;
    if (spec.cross_volume <= 0.0) report.notes.push_back("cross-section volume is not positive");
    if (spec.n < 3) report.notes.push_back("dimension below 3");

    const auto grid = numerics::log_grid(1e-3, 1e3, 60);
    for (double r : grid) {
        if (!(w.f(r) > 0.0) || !std::isfinite(w.f(r))) {
            report.positivity_ok = false;
            report.notes.push_back("warping not positive at r = " + std::to_string(r));
            break;
        }
    }

    report.origin_ok = true;
    if (w.origin_smooth) {
        const double ratio = w.f(1e-6) / 1e-6;
        const double slope = w.f1(1e-6);
        report.origin_ok = std::abs(ratio - 1.0) < 1e-4 && std::abs(slope - 1.0) < 1e-4;
        if (!report.origin_ok)
            report.notes.push_back("origin_smooth declared but f(r)/r does not approach 1");
    }

    report.derivative_consistency_ok = true;
    for (double r : numerics::log_grid(1e-2, 1e2, 50)) {
        const double h = 0.25 * r;
        const auto d1 = numerics::derive(w.f, r, h);
        const auto d2 = numerics::derive(w.f1, r, h);
        const bool ok1 = std::abs(d1.value - w.f1(r)) <= 1e-6 * (1.0 + std::abs(w.f1(r)));
        const bool ok2 = std::abs(d2.value - w.f2(r)) <= 1e-6 * (1.0 + std::abs(w.f2(r)));
        if (!ok1 || !ok2) {
            report.derivative_consistency_ok = false;
            report.notes.push_back("declared derivatives disagree with differentiation at r = " +
                                   std::to_string(r));
            break;
        }
    }

    const double tail_exponent = w.alpha * (spec.n - 1);
    report.nonparabolic = tail_exponent > 1.0;
    if (report.nonparabolic) {
        try {
            const int n = spec.n;
            auto integrand = [&w, n](double s) { return std::pow(w.f(s), 1.0 - n); };
            numerics::integrate_tail(integrand, 1.0, tail_exponent, {1e-8, 1e-10});
        } catch (const DivergentTail&) {
            report.nonparabolic = false;
            report.notes.push_back("tail integral of f^{1-n} diverges");
        } catch (const NonConvergence&) {
            report.nonparabolic = false;
            report.notes.push_back("tail integral of f^{1-n} did not stabilise");
        }
    } else {
        report.notes.push_back("declared growth gives alpha*(n-1) = " +
                               std::to_string(tail_exponent) + " <= 1: parabolic");
    }
    return report;
}

} // namespace greenlab
