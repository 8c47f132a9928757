#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "greenlab/check_report.hpp"
#include "greenlab/errors.hpp"
#include "greenlab/manifold.hpp"
#include "greenlab/numerics.hpp"

// The normalized Green function on a warped product and everything derived
// from it: b = G^{1/(2-n)}, |grad b|, the two Hessian eigenvalues of b^2, the
// bounded-Hessian constant, the h-formulation oracle and the decay profile of
// the Hessian envelope.

namespace greenlab {

/// Immutable radial profile of the Green function.  The normalization is by
/// flux: G(r) = c_N * integral_r^inf f^{1-n}, c_N = (n-2)|S^{n-1}| / vol(N),
/// which makes G = r^{2-n} on Euclidean space and keeps the sublevel identity
/// integral_{b<=r} |grad b|^2 = |S^{n-1}| r^n / n exact across the catalog.
class GreenProfile {
public:
    static constexpr double kKnotMin = 1e-7;
    static constexpr double kKnotMax = 1e6;

    explicit GreenProfile(const ManifoldSpec& spec) : spec_(spec) {
        const auto report = validate(spec);
        if (!report.nonparabolic)
            throw Parabolic("no positive Green function: " + spec.label);
        n_ = spec.n;
        sphere_ = unit_sphere_area(n_);
        c_n_ = (n_ - 2) * sphere_ / spec.cross_volume;
        k_ = c_n_ / (n_ - 2);
        build_table();
    }

    const ManifoldSpec& spec() const { return spec_; }
    int dimension() const { return n_; }
    double sphere_area() const { return sphere_; }
    double norm_const() const { return c_n_; }

    double G(double r) const {
        if (r < kKnotMin) return std::pow(lin_coeff_ * r, 2 - n_);
        return c_n_ * tail_integral(r);
    }
    double G1(double r) const { return -c_n_ * std::pow(spec_.warping.f(r), 1 - n_); }

    double b(double r) const {
        if (r < kKnotMin) return lin_coeff_ * r;
        return std::pow(c_n_ * tail_integral(r), -1.0 / (n_ - 2));
    }

    double b1(double r) const {
        return k_ * std::pow(b(r), n_ - 1) * std::pow(spec_.warping.f(r), 1 - n_);
    }

    double grad_b(double r) const { return b1(r); }

    /// tangential eigenvalue of Hess b^2: (b^2)' f'/f with multiplicity n-1
    double lam_tan(double r) const {
        return 2.0 * b(r) * b1(r) * spec_.warping.f1(r) / spec_.warping.f(r);
    }

    /// radial eigenvalue (b^2)'' via closed-form differentiation of b1
    double lam_rad(double r) const {
        const double bb = b(r);
        const double db = b1(r);
        return 2.0 * db * db +
               2.0 * (n_ - 1) * db * (db - bb * spec_.warping.f1(r) / spec_.warping.f(r));
    }

    /// positive part of the largest Hessian eigenvalue (the envelope H)
    double hess_envelope(double r) const {
        return std::max({lam_rad(r), lam_tan(r), 0.0});
    }

    bool linear_origin() const { return linear_origin_; }
    double origin_gradient() const { return lin_coeff_; }

private:
    void build_table() {
        const auto& w = spec_.warping;
        auto integrand = [this, &w](double s) { return std::pow(w.f(s), 1 - n_); };

        knots_ = numerics::log_grid(kKnotMin, kKnotMax, 833);
        for (double bp : w.breakpoints)
            if (bp > kKnotMin && bp < kKnotMax) knots_.push_back(bp);
        std::sort(knots_.begin(), knots_.end());
        knots_.erase(std::unique(knots_.begin(), knots_.end()), knots_.end());

        double tail_exponent = w.alpha * (n_ - 1);
        numerics::QuadratureResult tail;
        try {
            tail = numerics::integrate_tail(integrand, kKnotMax, tail_exponent, {1e-13, 1e-300});
        } catch (const DivergentTail&) {
            throw Parabolic("tail of f^{1-n} diverges: " + spec_.label);
        }

        cum_.assign(knots_.size(), 0.0);
        cum_.back() = tail.value;
        std::size_t evals = 0;
        for (std::size_t i = knots_.size() - 1; i-- > 0;) {
            const auto panel = numerics::detail::gk15(integrand, knots_[i], knots_[i + 1], evals);
            cum_[i] = cum_[i + 1] + panel.value;
        }

        // analytic continuation beyond the table, scaled for continuity
        const double raw = asymptotic_tail_raw(kKnotMax);
        asym_scale_ = raw > 0.0 ? cum_.back() / raw : 1.0;

        // linear continuation of b below the table
        lin_coeff_ = std::pow(c_n_ * cum_.front(), -1.0 / (n_ - 2)) / kKnotMin;
        const double probe = 10.0 * kKnotMin;
        const double ratio = std::pow(c_n_ * tail_integral(probe), -1.0 / (n_ - 2)) / probe;
        linear_origin_ = std::abs(ratio / lin_coeff_ - 1.0) < 1e-3;
    }

    double asymptotic_tail_raw(double r) const {
        const auto& w = spec_.warping;
        const double f = w.f(r);
        const double p_loc = std::max((n_ - 1) * r * w.f1(r) / f, 1.0 + 1e-9);
        return std::pow(f, 1 - n_) * r / (p_loc - 1.0);
    }

    /// integral_r^inf f^{1-n}: cumulative knot table plus one in-panel correction
    double tail_integral(double r) const {
        const auto& w = spec_.warping;
        if (r >= knots_.back()) return asym_scale_ * asymptotic_tail_raw(r);
        double lo = r;
        if (r < knots_.front()) lo = knots_.front(); // callers handle b below the table
        const auto it = std::upper_bound(knots_.begin(), knots_.end(), lo);
        const std::size_t idx = static_cast<std::size_t>(it - knots_.begin());
        std::size_t evals = 0;
        auto integrand = [this, &w](double s) { return std::pow(w.f(s), 1 - n_); };
        double correction = 0.0;
        if (knots_[idx] > lo)
            correction = numerics::detail::gk15(integrand, lo, knots_[idx], evals).value;
        return cum_[idx] + correction;
    }

    ManifoldSpec spec_;
    int n_ = 3;
    double sphere_ = 0.0;
    double c_n_ = 0.0;
    double k_ = 0.0;
    std::vector<double> knots_;
    std::vector<double> cum_;
    double asym_scale_ = 1.0;
    double lin_coeff_ = 1.0;
    bool linear_origin_ = true;
};

inline GreenProfile build_profile(const ManifoldSpec& spec) { return GreenProfile(spec); }

/// Verdict on the bounded-Hessian property Hess b^2 <= C g.
struct AssumptionVerdict {
    bool holds = false;
    std::optional<double> constant_c; // empty means unbounded
    double witness_r = 0.0;
    std::vector<std::pair<double, double>> profile; // (r, max eigenvalue)
    std::vector<std::string> notes;
};

/// Supremum of the largest Hessian eigenvalue over the audit grid, refined by
/// golden-section search near the argmax.  The verdict is Unbounded when the
/// curve is still increasing at the right edge and the declared growth does
/// not cap it (superlinear warpings).
inline AssumptionVerdict assumption_constant(const GreenProfile& profile,
                                             std::span<const double> r_grid) {
    AssumptionVerdict verdict;
    auto eigen_max = [&profile](double r) {
        return std::max(profile.lam_rad(r), profile.lam_tan(r));
    };

    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    verdict.profile.reserve(r_grid.size());
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        const double value = eigen_max(r_grid[i]);
        verdict.profile.emplace_back(r_grid[i], value);
        if (value > best) {
            best = value;
            best_idx = i;
        }
    }

    const std::size_t last = r_grid.size() - 1;
    const bool rising_at_edge =
        verdict.profile[last].second > verdict.profile[last - 1].second + 1e-12;
    if (rising_at_edge && profile.spec().warping.alpha > 1.0 + 1e-12) {
        verdict.holds = false;
        verdict.witness_r = r_grid[last];
        verdict.notes.push_back("max eigenvalue still increasing at the grid edge and the "
                                "declared growth is superlinear: unbounded");
        return verdict;
    }

    // golden-section refinement in log r around the argmax
    const double lo = r_grid[best_idx > 0 ? best_idx - 1 : 0];
    const double hi = r_grid[std::min(best_idx + 1, last)];
    double a = std::log(lo), c = std::log(hi);
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = c - kInvPhi * (c - a);
    double x2 = a + kInvPhi * (c - a);
    double f1 = eigen_max(std::exp(x1));
    double f2 = eigen_max(std::exp(x2));
    for (int iter = 0; iter < 80 && c - a > 1e-12; ++iter) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (c - a);
            f2 = eigen_max(std::exp(x2));
        } else {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - kInvPhi * (c - a);
            f1 = eigen_max(std::exp(x1));
        }
    }
    const double refined_r = std::exp(0.5 * (a + c));
    const double refined = eigen_max(refined_r);
    if (refined > best) {
        best = refined;
        verdict.witness_r = refined_r;
    } else {
        verdict.witness_r = r_grid[best_idx];
    }
    if (rising_at_edge)
        verdict.notes.push_back("eigenvalue curve approaches its limit from below at the "
                                "right edge; constant taken from the grid supremum");
    verdict.holds = true;
    verdict.constant_c = best;
    return verdict;
}

/// One sample of the h-formulation: b^2 = h(F) with F = f^2; dots denote
/// derivatives in F.  hdotdot comes from the radial harmonicity of G written
/// as an ODE in h, so reconstructing the Hessian from it cross-validates the
/// profile's eigenvalue evaluators.
struct HOracleSample {
    double r = 0.0;
    double F = 0.0;
    double h = 0.0;
    double hdot = 0.0;
    double hdotdot = 0.0;
};

inline HOracleSample h_oracle(const GreenProfile& profile, double r) {
    const auto& w = profile.spec().warping;
    const int n = profile.dimension();
    const double f = w.f(r);
    const double fp = w.f1(r);
    const double F = f * f;
    const double Fp = 2.0 * f * fp;
    const double Fpp = 2.0 * (fp * fp + f * w.f2(r));
    if (std::abs(Fp) < 1e-300 * (1.0 + F))
        throw DegenerateF("F' vanishes at r = " + std::to_string(r));

    HOracleSample sample;
    sample.r = r;
    sample.F = F;
    const double bb = profile.b(r);
    sample.h = bb * bb;
    sample.hdot = 2.0 * bb * profile.b1(r) / Fp;
    sample.hdotdot = sample.hdot * (0.5 * n * sample.hdot / sample.h -
                                    ((n - 1) / (2.0 * F) + Fpp / (Fp * Fp)));
    return sample;
}

/// Hessian eigenvalues of b^2 rebuilt from an h-sample:
/// radial hdotdot (F')^2 + hdot F'', tangential 2 hdot (f')^2.
inline std::pair<double, double> h_reconstructed_eigenvalues(const GreenProfile& profile,
                                                             const HOracleSample& sample) {
    const auto& w = profile.spec().warping;
    const double f = w.f(sample.r);
    const double fp = w.f1(sample.r);
    const double Fp = 2.0 * f * fp;
    const double Fpp = 2.0 * (fp * fp + f * w.f2(sample.r));
    const double rad = sample.hdotdot * Fp * Fp + sample.hdot * Fpp;
    const double tan = 2.0 * sample.hdot * fp * fp;
    return {rad, tan};
}

/// Decay profile of the Hessian envelope H(r) = max eigenvalue (positive
/// part) on the tail window, with a linear fit of log H against r^{1-alpha}
/// and, as a diagnostic, against log r.
struct HessDecayReport {
    std::vector<std::pair<double, double>> samples; // (r, H)
    double c0 = 0.0;
    double fit_exponent = 0.0;  // c5 in log H ~ c0 - c5 r^{1-alpha}
    double sup_residual = 0.0;  // sup norm of the fit residual in log H
    double power_slope = 0.0;   // slope of log H against log r
    bool is_exponential_type = false;
};

inline HessDecayReport hess_decay_profile(const GreenProfile& profile,
                                          std::span<const double> r_grid) {
    const double alpha = profile.spec().warping.alpha;
    if (!(alpha < 1.0))
        throw NotSublinear("decay profile requires sublinear growth, alpha = " +
                           std::to_string(alpha));

    HessDecayReport report;
    std::vector<double> xs, ys, logr;
    for (double r : r_grid) {
        const double H = profile.hess_envelope(r);
        report.samples.emplace_back(r, H);
        if (H > 0.0) {
            xs.push_back(std::pow(r, 1.0 - alpha));
            ys.push_back(std::log(H));
            logr.push_back(std::log(r));
        }
    }
    if (xs.size() < 3) {
        report.sup_residual = std::numeric_limits<double>::infinity();
        return report;
    }

    auto least_squares = [](const std::vector<double>& x, const std::vector<double>& y) {
        const double m = static_cast<double>(x.size());
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sx += x[i];
            sy += y[i];
            sxx += x[i] * x[i];
            sxy += x[i] * y[i];
        }
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const double intercept = (sy - slope * sx) / m;
        return std::pair{slope, intercept};
    };

    const auto [slope, intercept] = least_squares(xs, ys);
    report.c0 = intercept;
    report.fit_exponent = -slope;
    for (std::size_t i = 0; i < xs.size(); ++i)
        report.sup_residual =
            std::max(report.sup_residual, std::abs(ys[i] - (intercept + slope * xs[i])));
    report.power_slope = least_squares(logr, ys).first;
    report.is_exponential_type = slope < 0.0 && report.sup_residual < 0.1;
    return report;
}

/// Geodesic radius rho with b(rho) = level; b is strictly increasing, so the
/// root is bracketed and unique.  Searches the audit window extended by the
/// declared asymptotics.
inline double radius_of_level(const GreenProfile& profile, double level) {
    if (!(level > 0.0)) throw OutOfRange("level value must be positive");
    const double b_min = profile.b(GreenProfile::kKnotMin);
    if (level <= b_min) return level / profile.origin_gradient();
    double hi = 1.0;
    while (profile.b(hi) < level) {
        hi *= 10.0;
        if (hi > 1e10) throw OutOfRange("level " + std::to_string(level) +
                                        " beyond the range of b on the audit window");
    }
    auto fn = [&profile, level](double r) { return profile.b(r) - level; };
    return numerics::find_root(fn, GreenProfile::kKnotMin, hi, {1e-13, 1e-300});
}

/// Pointwise residual of the trace identity
/// lam_rad + (n-1) lam_tan = 2 n |grad b|^2 (harmonicity of G).
inline CheckReport trace_identity_check(const GreenProfile& profile,
                                        std::span<const double> r_grid) {
    CheckReport report;
    report.name = "trace_identity";
    report.tolerance_used = 1e-8;
    const int n = profile.dimension();
    for (double r : r_grid) {
        const double g2 = profile.grad_b(r) * profile.grad_b(r);
        const double lhs = profile.lam_rad(r) + (n - 1) * profile.lam_tan(r);
        const double scaled = std::abs(lhs - 2.0 * n * g2) / (1.0 + 2.0 * n * g2);
        if (scaled > report.max_violation) {
            report.max_violation = scaled;
            report.witness = r;
        }
    }
    report.verdict = report.max_violation <= report.tolerance_used;
    return report;
}

/// Pointwise residual of the radial gradient identity
/// (|grad b|^2)' (b^2)' = 2 lam_rad |grad b|^2 - 4 |grad b|^4, with the left
/// side differentiated numerically (independent of the closed-form chain).
inline CheckReport lemma_2_2_check(const GreenProfile& profile,
                                   std::span<const double> r_grid) {
    CheckReport report;
    report.name = "lemma22";
    report.tolerance_used = 1e-7;
    for (double r : r_grid) {
        auto grad_sq = [&profile](double x) {
            const double g = profile.grad_b(x);
            return g * g;
        };
        const double g2 = grad_sq(r);
        const double lhs =
            numerics::derive(grad_sq, r, 0.2 * r).value * 2.0 * profile.b(r) * profile.b1(r);
        const double rhs = 2.0 * profile.lam_rad(r) * g2 - 4.0 * g2 * g2;
        const double scale = 1.0 + std::abs(2.0 * profile.lam_rad(r) * g2) + 4.0 * g2 * g2;
        const double scaled = std::abs(lhs - rhs) / scale;
        if (scaled > report.max_violation) {
            report.max_violation = scaled;
            report.witness = r;
        }
    }
    report.verdict = report.max_violation <= report.tolerance_used;
    return report;
}

/// CSV export with columns r, G, b, grad_b, lam_rad, lam_tan, H.
inline std::string export_profile_csv(const GreenProfile& profile,
                                      std::span<const double> r_grid) {
    std::ostringstream out;
    out << "r,G,b,grad_b,lam_rad,lam_tan,H\n";
    for (double r : r_grid) {
        out << csv::fmt(r) << ',' << csv::fmt(profile.G(r)) << ',' << csv::fmt(profile.b(r))
            << ',' << csv::fmt(profile.grad_b(r)) << ',' << csv::fmt(profile.lam_rad(r)) << ','
            << csv::fmt(profile.lam_tan(r)) << ',' << csv::fmt(profile.hess_envelope(r)) << '\n';
    }
    return out.str();
}

} // namespace greenlab
