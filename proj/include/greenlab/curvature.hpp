#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "greenlab/check_report.hpp"
#include "greenlab/errors.hpp"
#include "greenlab/manifold.hpp"
#include "greenlab/numerics.hpp"

// Curvature of dr^2 + f(r)^2 g_N with an Einstein cross-section of constant
// curvature kappa_N (round unit sphere by default).  In an orthonormal frame
// the curvature operator has two eigenvalue curves,
//   k_rad = -f''/f   on planes containing the radial direction,
//   k_tan = (kappa_N - f'^2)/f^2   on tangential planes,
// and the Ricci tensor is diagonal with entries
//   ric_rad = (n-1) k_rad,   ric_tan = k_rad + (n-2) k_tan.

namespace greenlab {

class CurvatureProfile {
public:
    CurvatureProfile(const ManifoldSpec& spec, double cross_curvature = 1.0)
        : spec_(spec), kappa_(cross_curvature) {
        if (!(cross_curvature > 0.0)) throw Error("cross-section curvature must be positive");
        verify_nabla_ric_formula();
    }

    const ManifoldSpec& spec() const { return spec_; }
    double cross_curvature() const { return kappa_; }

    double k_rad(double r) const { return -spec_.warping.f2(r) / spec_.warping.f(r); }

    double k_tan(double r) const {
        const double f = spec_.warping.f(r);
        const double fp = spec_.warping.f1(r);
        return (kappa_ - fp * fp) / (f * f);
    }

    double ric_rad(double r) const { return (spec_.n - 1) * k_rad(r); }

    double ric_tan(double r) const { return k_rad(r) + (spec_.n - 2) * k_tan(r); }

    /// tensor norm of the curvature operator (space-form cross-section)
    double rm_norm(double r) const {
        const int n = spec_.n;
        const double kr = k_rad(r);
        const double kt = k_tan(r);
        return std::sqrt(4.0 * (n - 1) * kr * kr + 2.0 * (n - 1) * (n - 2) * kt * kt);
    }

    /// |nabla Ric| assembled from the Christoffel symbols of the warped
    /// metric applied to the diagonal Ricci tensor; radial derivatives of
    /// the eigenvalue curves are taken by Richardson differentiation.
    double nabla_ric_norm(double r) const {
        const int n = spec_.n;
        const double h = safe_step(r);
        const double d_rad = numerics::derive([this](double x) { return ric_rad(x); }, r, h).value;
        const double d_tan = numerics::derive([this](double x) { return ric_tan(x); }, r, h).value;
        const double mix = spec_.warping.f1(r) / spec_.warping.f(r) * (ric_rad(r) - ric_tan(r));
        return std::sqrt(d_rad * d_rad + (n - 1) * d_tan * d_tan + 2.0 * (n - 1) * mix * mix);
    }

    /// Independent route: finite differences of the coordinate components of
    /// Ric contracted against the Christoffels Gamma^r_ij = -f f' g_ij and
    /// Gamma^i_rj = (f'/f) delta_ij, with explicit index loops.
    double nabla_ric_norm_fd(double r) const {
        const int n = spec_.n;
        const auto& w = spec_.warping;
        const double f = w.f(r);
        const double fp = w.f1(r);
        const double h = safe_step(r);

        // coordinate components at radius x (local normal coordinates on N)
        auto T00 = [this](double x) { return ric_rad(x); };
        auto Tii = [this, &w](double x) {
            const double fx = w.f(x);
            return ric_tan(x) * fx * fx;
        };
        const double dT00 = numerics::derive(T00, r, h).value;
        const double dTii = numerics::derive(Tii, r, h).value;

        auto T = [&](int b, int c) -> double {
            if (b != c) return 0.0;
            return b == 0 ? T00(r) : Tii(r);
        };
        auto dT = [&](int b, int c) -> double {
            if (b != c) return 0.0;
            return b == 0 ? dT00 : dTii;
        };
        auto gamma = [&](int d, int a, int b) -> double {
            if (d == 0 && a != 0 && b != 0) return a == b ? -f * fp : 0.0;
            if (d != 0 && a == 0 && b != 0) return d == b ? fp / f : 0.0;
            if (d != 0 && a != 0 && b == 0) return d == a ? fp / f : 0.0;
            return 0.0;
        };

        double norm_sq = 0.0;
        for (int a = 0; a < n; ++a) {
            const double ga = a == 0 ? 1.0 : 1.0 / (f * f);
            for (int b = 0; b < n; ++b) {
                const double gb = b == 0 ? 1.0 : 1.0 / (f * f);
                for (int c = 0; c < n; ++c) {
                    const double gc = c == 0 ? 1.0 : 1.0 / (f * f);
                    double value = a == 0 ? dT(b, c) : 0.0;
                    for (int d = 0; d < n; ++d)
                        value -= gamma(d, a, b) * T(d, c) + gamma(d, a, c) * T(b, d);
                    norm_sq += ga * gb * gc * value * value;
                }
            }
        }
        return std::sqrt(norm_sq);
    }

private:
    // keep difference stencils inside smooth pieces of the warping
    double safe_step(double r) const {
        double h = 0.25 * r;
        for (double bp : spec_.warping.breakpoints) {
            const double gap = std::abs(r - bp);
            if (gap > 1e-12) h = std::min(h, 0.45 * gap);
        }
        return std::max(h, 1e-9 * r);
    }

    void verify_nabla_ric_formula() const {
        for (double r : numerics::log_grid(0.05, 50.0, 10)) {
            bool at_kink = false;
            for (double bp : spec_.warping.breakpoints)
                if (std::abs(r - bp) < 1e-6 * bp) at_kink = true;
            if (at_kink) continue;
            const double closed = nabla_ric_norm(r);
            const double fd = nabla_ric_norm_fd(r);
            if (std::abs(closed - fd) > 1e-5 * (1.0 + std::max(closed, fd)))
                throw Error("nabla Ric norm formula disagrees with the finite-difference "
                            "assembly at r = " + std::to_string(r));
        }
    }

    ManifoldSpec spec_;
    double kappa_ = 1.0;
};

inline CurvatureProfile build_curvature(const ManifoldSpec& spec, double cross_curvature = 1.0) {
    return CurvatureProfile(spec, cross_curvature);
}

struct HypothesisReport {
    bool radial_curvature_nonneg = false;
    bool ricci_nonneg = false;
    bool parallel_ricci = false;
    std::optional<double> rm_decay_K;       // sup of r^2 |Rm| on the tail grid
    std::optional<double> nabla_ric_decay_L; // sup of r^3 |nabla Ric|
    std::vector<std::string> notes;
};

/// Grid-certified hypothesis flags with slack 1e-9.  The decay constants are
/// the sups of r^2 |Rm| and r^3 |nabla Ric| over the tail window: they bound
/// the curvature on the grid only, and a note records when the rescaled curve
/// is still increasing at the edge.
inline HypothesisReport check_thm_1_2_hypotheses(const CurvatureProfile& profile,
                                                 std::span<const double> r_grid) {
    HypothesisReport report;
    constexpr double kSlack = 1e-9;
    report.radial_curvature_nonneg = true;
    report.ricci_nonneg = true;
    report.parallel_ricci = true;
    for (double r : r_grid) {
        if (profile.k_rad(r) < -kSlack) report.radial_curvature_nonneg = false;
        if (profile.ric_rad(r) < -kSlack || profile.ric_tan(r) < -kSlack)
            report.ricci_nonneg = false;
        if (profile.nabla_ric_norm(r) > kSlack) report.parallel_ricci = false;
    }
    if (!report.radial_curvature_nonneg)
        report.notes.push_back("radial sectional curvature dips below zero on the grid");
    if (!report.parallel_ricci)
        report.notes.push_back("Ricci tensor is not parallel on the grid");

    const auto tail = numerics::log_grid(10.0, 1e4, 80);
    double sup_K = 0.0, sup_L = 0.0, last_K = 0.0, last_L = 0.0, prev_K = 0.0, prev_L = 0.0;
    bool finite = true;
    for (double r : tail) {
        prev_K = last_K;
        prev_L = last_L;
        last_K = r * r * profile.rm_norm(r);
        last_L = r * r * r * profile.nabla_ric_norm(r);
        if (!std::isfinite(last_K) || !std::isfinite(last_L)) finite = false;
        sup_K = std::max(sup_K, last_K);
        sup_L = std::max(sup_L, last_L);
    }
    if (finite) {
        report.rm_decay_K = sup_K;
        report.nabla_ric_decay_L = sup_L;
        if (last_K > prev_K + 1e-9 * (1.0 + prev_K))
            report.notes.push_back("r^2 |Rm| still increasing at the tail edge: the constant "
                                   "certifies the grid window only");
        if (last_L > prev_L + 1e-9 * (1.0 + prev_L))
            report.notes.push_back("r^3 |nabla Ric| still increasing at the tail edge: the "
                                   "constant certifies the grid window only");
    } else {
        report.notes.push_back("curvature not finite on the tail grid");
    }
    return report;
}

/// CSV export with columns r, k_rad, k_tan, ric_rad, ric_tan, nabla_ric_norm.
inline std::string export_curvature_csv(const CurvatureProfile& profile,
                                        std::span<const double> r_grid) {
    std::ostringstream out;
    out << "r,k_rad,k_tan,ric_rad,ric_tan,nabla_ric_norm\n";
    for (double r : r_grid) {
        out << csv::fmt(r) << ',' << csv::fmt(profile.k_rad(r)) << ','
            << csv::fmt(profile.k_tan(r)) << ',' << csv::fmt(profile.ric_rad(r)) << ','
            << csv::fmt(profile.ric_tan(r)) << ',' << csv::fmt(profile.nabla_ric_norm(r)) << '\n';
    }
    return out.str();
}

} // namespace greenlab
