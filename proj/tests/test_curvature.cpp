#include <cmath>

#include "catch_amalgamated.hpp"
#include "greenlab/curvature.hpp"
#include "test_util.hpp"

using namespace greenlab;
using greenlab::testing::close;
using greenlab::testing::close_rel;

namespace {

// Independent curvature oracle: assemble the two sectional curves from the
// Christoffel symbols, differentiating Gamma^r_ij = -f f' numerically and
// injecting the cross-section curvature, instead of using the closed forms.
struct FrameCurvature {
    double k_rad;
    double k_tan;
};

FrameCurvature fd_sectional(const ManifoldSpec& spec, double kappa, double r) {
    const auto& w = spec.warping;
    const double f = w.f(r);
    const double fp = w.f1(r);
    // R_{0i0i} = -d/dr(f f') + (f f')(f'/f) = -f f''   (coordinate components)
    const double d_ffp =
        numerics::derive([&w](double x) { return w.f(x) * w.f1(x); }, r, 0.2 * r).value;
    const double R0i0i = -d_ffp + f * fp * (fp / f);
    // R_{ijij} = f^2 (kappa - f'^2) from the Gauss piece plus the Gamma Gamma cross terms
    const double Rijij = kappa * f * f - fp * fp * f * f;
    return {R0i0i / (f * f), Rijij / (f * f * f * f)};
}

} // namespace

TEST_CASE("flat entries have vanishing curvature", "[curvature]") {
    for (const auto& spec : {make_euclidean(3), make_euclidean(5), make_cone(4, 1.0)}) {
        CurvatureProfile profile(spec);
        for (double r : numerics::log_grid(1e-2, 1e2, 20)) {
            REQUIRE(std::abs(profile.k_rad(r)) <= 1e-14);
            REQUIRE(std::abs(profile.k_tan(r)) <= 1e-14);
            REQUIRE(std::abs(profile.nabla_ric_norm(r)) <= 1e-9);
        }
    }
}

TEST_CASE("cone curvature closed forms", "[curvature]") {
    const double a = 0.5;
    CurvatureProfile profile(make_cone(4, a));
    for (double r : numerics::log_grid(0.1, 10.0, 9)) {
        REQUIRE(std::abs(profile.k_rad(r)) <= 1e-14);
        REQUIRE(close_rel(profile.k_tan(r), (1.0 - a * a) / (a * a * r * r), 1e-12));
        const auto fd = fd_sectional(profile.spec(), 1.0, r);
        REQUIRE(close(profile.k_rad(r), fd.k_rad, 1e-8));
        REQUIRE(close(profile.k_tan(r), fd.k_tan, 1e-8));
    }
    // negative tangential curvature for slopes above one
    CurvatureProfile wide(make_cone(4, 2.0));
    REQUIRE(wide.k_tan(1.0) < 0.0);
    REQUIRE(wide.ric_tan(1.0) < 0.0);
}

TEST_CASE("sublinear curvature signs and oracle", "[curvature]") {
    CurvatureProfile profile(make_sublinear(4, 0.5));
    for (double r : {5.0, 20.0, 100.0}) REQUIRE(profile.k_rad(r) > 0.0); // f concave at infinity
    for (double r : numerics::log_grid(0.1, 100.0, 8)) {
        const auto fd = fd_sectional(profile.spec(), 1.0, r);
        REQUIRE(close(profile.k_rad(r), fd.k_rad, 1e-7));
        REQUIRE(close(profile.k_tan(r), fd.k_tan, 1e-7));
        REQUIRE(profile.ric_rad(r) >= 0.0);
        REQUIRE(profile.ric_tan(r) >= 0.0);
    }
}

TEST_CASE("ric_rad is (n-1) k_rad exactly", "[curvature]") {
    CurvatureProfile profile(make_sublinear(3, 0.75));
    for (double r : numerics::log_grid(1e-2, 1e2, 15))
        REQUIRE(profile.ric_rad(r) == 2.0 * profile.k_rad(r));
}

TEST_CASE("nabla Ric closed form agrees with the index-loop assembly", "[curvature]") {
    for (const auto& spec : {make_cone(4, 0.5), make_sublinear(4, 0.5), make_sublinear(3, 0.75),
                             make_perturbed_cone(4, 1.0, 0.01, 1.0)}) {
        CurvatureProfile profile(spec); // construction already runs the gate
        for (double r : numerics::log_grid(0.05, 50.0, 10)) {
            const double closed = profile.nabla_ric_norm(r);
            const double fd = profile.nabla_ric_norm_fd(r);
            REQUIRE(std::abs(closed - fd) <= 1e-5 * (1.0 + std::max(closed, fd)));
        }
    }
}

TEST_CASE("flatness characterisation over the catalog", "[curvature]") {
    struct Entry {
        ManifoldSpec spec;
        bool flat;
    };
    for (const auto& [spec, flat] : {Entry{make_euclidean(4), true},
                                     Entry{make_cone(4, 1.0), true},
                                     Entry{make_cone(4, 0.5), false},
                                     Entry{make_sublinear(4, 0.5), false}}) {
        CurvatureProfile profile(spec);
        bool vanishes = true;
        for (double r : numerics::log_grid(1e-2, 1e2, 20))
            if (std::abs(profile.k_rad(r)) > 1e-12 || std::abs(profile.k_tan(r)) > 1e-12)
                vanishes = false;
        REQUIRE(vanishes == flat);
    }
}

TEST_CASE("hypothesis report", "[curvature]") {
    const auto grid = numerics::log_grid(1e-2, 1e2, 40);

    auto eucl = check_thm_1_2_hypotheses(CurvatureProfile(make_euclidean(4)), grid);
    REQUIRE(eucl.radial_curvature_nonneg);
    REQUIRE(eucl.ricci_nonneg);
    REQUIRE(eucl.parallel_ricci);
    REQUIRE(eucl.rm_decay_K.has_value());
    REQUIRE(*eucl.rm_decay_K <= 1e-9);
    REQUIRE(*eucl.nabla_ric_decay_L <= 1e-9);

    auto cone = check_thm_1_2_hypotheses(CurvatureProfile(make_cone(4, 0.5)), grid);
    REQUIRE(cone.radial_curvature_nonneg);
    REQUIRE(cone.ricci_nonneg);
    REQUIRE_FALSE(cone.parallel_ricci);
    REQUIRE(cone.rm_decay_K.has_value());
    REQUIRE(*cone.rm_decay_K > 0.0);
    REQUIRE(cone.nabla_ric_decay_L.has_value());

    auto wide = check_thm_1_2_hypotheses(CurvatureProfile(make_cone(4, 2.0)), grid);
    REQUIRE(wide.radial_curvature_nonneg); // k_rad = 0 on every cone
    REQUIRE_FALSE(wide.ricci_nonneg);

    auto sub = check_thm_1_2_hypotheses(CurvatureProfile(make_sublinear(4, 0.5)), grid);
    REQUIRE(sub.radial_curvature_nonneg);
    REQUIRE(sub.ricci_nonneg);
    REQUIRE_FALSE(sub.parallel_ricci);
    REQUIRE(sub.rm_decay_K.has_value());
    REQUIRE(sub.nabla_ric_decay_L.has_value());
}

TEST_CASE("cone decay constants match the closed forms", "[curvature]") {
    // |Rm| = sqrt(2 (n-1)(n-2)) |k_tan| and k_tan = (1-a^2)/(a^2 r^2), so
    // r^2 |Rm| is constant; same structure for r^3 |nabla Ric|
    const double a = 0.5;
    const int n = 4;
    CurvatureProfile profile(make_cone(n, a));
    const double kt = (1.0 - a * a) / (a * a);
    const double expected_K = std::sqrt(2.0 * (n - 1) * (n - 2)) * kt;
    auto report = check_thm_1_2_hypotheses(profile, numerics::log_grid(1e-2, 1e2, 10));
    REQUIRE(close_rel(*report.rm_decay_K, expected_K, 1e-9));
    // |nabla Ric|^2 = (n-1) (ric_tan')^2 + 2 (n-1) (f'/f)^2 ric_tan^2 with
    // ric_tan = (n-2) kt / r^2
    const double ric_tan = (n - 2) * kt;
    const double expected_L =
        std::sqrt((n - 1) * 4.0 * ric_tan * ric_tan + 2.0 * (n - 1) * ric_tan * ric_tan);
    REQUIRE(close_rel(*report.nabla_ric_decay_L, expected_L, 1e-6));
}

TEST_CASE("curvature csv export", "[curvature]") {
    CurvatureProfile profile(make_cone(4, 0.5));
    const auto text = export_curvature_csv(profile, numerics::log_grid(0.1, 10.0, 4));
    REQUIRE(text.rfind("r,k_rad,k_tan,ric_rad,ric_tan,nabla_ric_norm\n", 0) == 0);
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 5);
}
