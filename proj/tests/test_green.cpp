#include <cmath>
#include <numbers>
#include <vector>

#include "catch_amalgamated.hpp"
#include "greenlab/green.hpp"
#include "test_util.hpp"

using namespace greenlab;
using greenlab::testing::close;
using greenlab::testing::close_rel;

namespace {

// Closed forms on a cone f(r) = a r, derived from G = a^{1-n} r^{2-n}:
//   b = a^{(n-1)/(n-2)} r,  |grad b| = a^{(n-1)/(n-2)},
//   lam_rad = lam_tan = 2 a^{2(n-1)/(n-2)}.
struct ConeOracle {
    int n;
    double a;
    double grad() const { return std::pow(a, double(n - 1) / (n - 2)); }
    double b(double r) const { return grad() * r; }
    double G(double r) const { return std::pow(a, 1.0 - n) * std::pow(r, 2.0 - n); }
    double eigen() const { return 2.0 * std::pow(a, 2.0 * (n - 1) / (n - 2)); }
};

std::vector<ManifoldSpec> audit_catalog() {
    return {make_euclidean(3), make_euclidean(4), make_cone(4, 0.5), make_cone(4, 0.9),
            make_sublinear(4, 0.5), make_sublinear(3, 0.75),
            make_perturbed_cone(4, 1.0, 0.01, 1.0)};
}

} // namespace

TEST_CASE("euclidean profile matches r^{2-n}", "[green]") {
    for (int n : {3, 4, 5}) {
        GreenProfile profile(make_euclidean(n));
        for (double r : numerics::log_grid(1e-3, 1e3, 50)) {
            REQUIRE(close_rel(profile.G(r), std::pow(r, 2.0 - n), 1e-10));
            REQUIRE(close_rel(profile.b(r), r, 1e-10));
            REQUIRE(std::abs(profile.grad_b(r) - 1.0) <= 1e-10);
            REQUIRE(close_rel(profile.lam_rad(r), 2.0, 1e-10));
            REQUIRE(close_rel(profile.lam_tan(r), 2.0, 1e-10));
        }
        REQUIRE(close_rel(profile.G(2.0), std::pow(2.0, 2.0 - n), 1e-12));
    }
    GreenProfile e3(make_euclidean(3));
    REQUIRE(close_rel(e3.G(2.0), 0.5, 1e-12));
    REQUIRE(close_rel(e3.b(2.0), 2.0, 1e-12));
}

TEST_CASE("cone profile matches the symbolic closed forms", "[green]") {
    for (double a : {0.5, 0.9}) {
        const ConeOracle oracle{4, a};
        GreenProfile profile(make_cone(4, a));
        for (double r : numerics::log_grid(1e-3, 1e3, 50)) {
            REQUIRE(close_rel(profile.G(r), oracle.G(r), 1e-9));
            REQUIRE(close_rel(profile.b(r), oracle.b(r), 1e-9));
            REQUIRE(close_rel(profile.grad_b(r), oracle.grad(), 1e-9));
            REQUIRE(close_rel(profile.lam_rad(r), oracle.eigen(), 1e-9));
            REQUIRE(close_rel(profile.lam_tan(r), oracle.eigen(), 1e-9));
        }
    }
    // spot values from the n = 4, a = 1/2 cone
    GreenProfile half(make_cone(4, 0.5));
    REQUIRE(std::abs(half.b(1.0) - 0.3535533905932738) <= 1e-9);
    REQUIRE(std::abs(half.grad_b(1.0) - 0.3535533905932738) <= 1e-9);
    REQUIRE(std::abs(half.lam_rad(1.0) - 0.25) <= 1e-9);
    REQUIRE(std::abs(half.lam_tan(1.0) - 0.25) <= 1e-9);
}

TEST_CASE("sublinear profile has Euclidean asymptotics at the origin", "[green]") {
    GreenProfile profile(make_sublinear(4, 0.5));
    REQUIRE(std::abs(profile.grad_b(1e-4) - 1.0) <= 1e-3);
    REQUIRE(std::abs(profile.lam_rad(1e-4) - 2.0) <= 1e-3);
    REQUIRE(std::abs(profile.lam_tan(1e-4) - 2.0) <= 1e-3);
}

TEST_CASE("profile shape invariants", "[green]") {
    GreenProfile profile(make_sublinear(4, 0.5));
    const auto grid = numerics::log_grid(1e-4, 1e4, 40);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        REQUIRE(profile.G(grid[i]) > profile.G(grid[i + 1])); // strictly decreasing
        REQUIRE(profile.b(grid[i]) < profile.b(grid[i + 1])); // strictly increasing
        REQUIRE(profile.grad_b(grid[i]) > 0.0);
    }
    REQUIRE_THROWS_AS(GreenProfile(make_power_custom(4, 0.2)), Parabolic);
}

TEST_CASE("quadrature pipeline agrees with direct differentiation", "[green]") {
    // independent audit: derive() applied to the quadrature-backed b recovers
    // the closed-form b1
    for (const auto& spec : {make_cone(4, 0.5), make_sublinear(4, 0.5)}) {
        GreenProfile profile(spec);
        for (double r : numerics::log_grid(1e-2, 1e2, 9)) {
            const auto db = numerics::derive([&](double x) { return profile.b(x); }, r, 0.2 * r);
            REQUIRE(close_rel(db.value, profile.b1(r), 1e-8));
            const auto dsq =
                numerics::derive([&](double x) { return profile.b(x) * profile.b(x); }, r,
                                 0.2 * r);
            REQUIRE(close_rel(dsq.value, 2.0 * profile.b(r) * profile.b1(r), 1e-8));
        }
    }
}

TEST_CASE("trace identity over the catalog", "[green]") {
    for (const auto& spec : audit_catalog()) {
        GreenProfile profile(spec);
        const int n = spec.n;
        for (double r : numerics::log_grid(1e-4, 1e4, 50)) {
            const double g2 = profile.grad_b(r) * profile.grad_b(r);
            const double lhs = profile.lam_rad(r) + (n - 1) * profile.lam_tan(r);
            REQUIRE(std::abs(lhs - 2.0 * n * g2) <= 1e-8 * (1.0 + 2.0 * n * g2));
        }
    }
}

TEST_CASE("pointwise gradient-flow identity over the catalog", "[green]") {
    // d/dr |grad b|^2 * (b^2)' = 2 lam_rad |grad b|^2 - 4 |grad b|^4, with the
    // left side differentiated numerically
    for (const auto& spec : audit_catalog()) {
        GreenProfile profile(spec);
        for (double r : numerics::log_grid(1e-4, 1e4, 25)) {
            auto grad_sq = [&](double x) {
                const double g = profile.grad_b(x);
                return g * g;
            };
            const double g2 = grad_sq(r);
            const double lhs = numerics::derive(grad_sq, r, 0.2 * r).value * 2.0 *
                               profile.b(r) * profile.b1(r);
            const double rhs = 2.0 * profile.lam_rad(r) * g2 - 4.0 * g2 * g2;
            const double scale = 1.0 + std::abs(2.0 * profile.lam_rad(r) * g2) + 4.0 * g2 * g2;
            REQUIRE(std::abs(lhs - rhs) <= 1e-7 * scale);
        }
    }
}

TEST_CASE("gradient bound and rigidity over the catalog", "[green]") {
    // |grad b| <= 1 on the entries with nonnegative Ricci curvature, with the
    // supremum reaching 1 only on the Euclidean entry
    struct Entry {
        ManifoldSpec spec;
        bool euclidean;
    };
    const std::vector<Entry> entries = {{make_euclidean(3), true},
                                        {make_euclidean(4), true},
                                        {make_cone(4, 0.5), false},
                                        {make_cone(4, 0.9), false},
                                        {make_sublinear(4, 0.5), false}};
    for (const auto& [spec, is_euclidean] : entries) {
        GreenProfile profile(spec);
        for (double r : numerics::log_grid(1e-4, 1e4, 60))
            REQUIRE(profile.grad_b(r) <= 1.0 + 1e-9);
        // rigidity is detected on a window bounded away from the pole, where
        // origin-smooth entries are no longer Euclidean to second order
        double sup = 0.0;
        for (double r : numerics::log_grid(0.1, 100.0, 60))
            sup = std::max(sup, profile.grad_b(r));
        REQUIRE((std::abs(sup - 1.0) <= 1e-6) == is_euclidean);
    }
}

TEST_CASE("assumption constant", "[green]") {
    const auto grid = numerics::log_grid(1e-4, 1e4, 80);

    auto eucl = assumption_constant(GreenProfile(make_euclidean(3)), grid);
    REQUIRE(eucl.holds);
    REQUIRE(std::abs(*eucl.constant_c - 2.0) <= 1e-8);

    auto cone = assumption_constant(GreenProfile(make_cone(4, 0.5)), grid);
    REQUIRE(cone.holds);
    REQUIRE(std::abs(*cone.constant_c - 0.25) <= 1e-8);

    auto sub = assumption_constant(GreenProfile(make_sublinear(4, 0.5)), grid);
    REQUIRE(sub.holds);
    REQUIRE(*sub.constant_c <= 2.0 + 1e-6);
    REQUIRE(*sub.constant_c >= 1.9); // approaches the Euclidean value at the pole
    // eigenvalue curve decays towards infinity
    REQUIRE(sub.profile.back().second < 0.01 * *sub.constant_c);

    auto perturbed = assumption_constant(GreenProfile(make_perturbed_cone(4, 1.0, 0.01, 1.0)),
                                         grid);
    REQUIRE(perturbed.holds);
    REQUIRE(std::abs(*perturbed.constant_c - 2.0) <= 0.2); // persists under small perturbation

    auto super = assumption_constant(GreenProfile(make_power_custom(4, 2.0)), grid);
    REQUIRE_FALSE(super.holds);
    REQUIRE_FALSE(super.constant_c.has_value());
}

TEST_CASE("h-oracle closed forms", "[green]") {
    GreenProfile eucl(make_euclidean(4));
    for (double r : {0.5, 1.0, 7.0}) {
        const auto s = h_oracle(eucl, r);
        REQUIRE(close_rel(s.h, s.F, 1e-10)); // h(F) = F in the model case
        REQUIRE(std::abs(s.hdot - 1.0) <= 1e-10);
        REQUIRE(std::abs(s.hdotdot) <= 1e-10);
    }

    // brute force on the cone: b^2 = a^3 r^2 and F = a^2 r^2 give h = a F
    GreenProfile cone(make_cone(4, 0.5));
    const auto s = h_oracle(cone, 1.0);
    REQUIRE(std::abs(s.hdot - 0.5) <= 1e-9);
    REQUIRE(std::abs(s.hdotdot) <= 1e-9);
}

TEST_CASE("h-oracle reconstruction equals the direct eigenvalues", "[green]") {
    for (const auto& spec : audit_catalog()) {
        GreenProfile profile(spec);
        for (double r : numerics::log_grid(1e-4, 1e4, 50)) {
            const auto sample = h_oracle(profile, r);
            const auto [rad, tan] = h_reconstructed_eigenvalues(profile, sample);
            REQUIRE(close(rad, profile.lam_rad(r), 1e-8));
            REQUIRE(close(tan, profile.lam_tan(r), 1e-8));
            REQUIRE(close_rel(sample.h, profile.b(r) * profile.b(r), 1e-8));
        }
    }
}

TEST_CASE("h-oracle degenerate warping", "[green]") {
    // a warping with f' = 0 at r = 1 (still positive, superlinear at infinity)
    ManifoldSpec spec = make_euclidean(4);
    spec.warping.f = [](double r) {
        const double t = r - 1.0;
        return 2.0 + t * t * t / 3.0;
    };
    spec.warping.f1 = [](double r) {
        const double t = r - 1.0;
        return t * t;
    };
    spec.warping.f2 = [](double r) { return 2.0 * (r - 1.0); };
    spec.warping.alpha = 3.0;
    spec.warping.origin_smooth = false;
    spec.label = "flat-spot";
    GreenProfile profile(spec);
    REQUIRE_THROWS_AS(h_oracle(profile, 1.0), DegenerateF);
    REQUIRE_NOTHROW(h_oracle(profile, 2.0));
}

TEST_CASE("hessian decay profile", "[green]") {
    REQUIRE_THROWS_AS(
        hess_decay_profile(GreenProfile(make_euclidean(4)), numerics::log_grid(10, 1e3, 40)),
        NotSublinear);

    const auto grid = numerics::log_grid(10.0, 1e3, 60);
    struct Case {
        int n;
        double alpha;
    };
    for (auto [n, alpha] : {Case{4, 0.5}, Case{4, 0.7}, Case{3, 0.75}}) {
        GreenProfile profile(make_sublinear(n, alpha));
        const auto report = hess_decay_profile(profile, grid);
        REQUIRE(report.fit_exponent > 0.0); // envelope decreases along the window
        REQUIRE(report.samples.front().second > report.samples.back().second);
        // the envelope decays like a power law with exponent 2(n-1)(1-alpha)/(n-2)
        const double expected_power = -2.0 * (n - 1) * (1.0 - alpha) / (n - 2);
        REQUIRE(std::abs(report.power_slope - expected_power) <= 0.05);
        // consistency of the flag with its definition
        REQUIRE(report.is_exponential_type ==
                (report.fit_exponent > 0.0 && report.sup_residual < 0.1));
    }
}

TEST_CASE("profile csv export", "[green]") {
    GreenProfile profile(make_euclidean(3));
    const auto text = export_profile_csv(profile, numerics::log_grid(0.1, 10.0, 5));
    REQUIRE(text.rfind("r,G,b,grad_b,lam_rad,lam_tan,H\n", 0) == 0);
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 6);
}
