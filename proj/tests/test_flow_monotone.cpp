#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "greenlab/flow_monotone.hpp"
#include "test_util.hpp"

using namespace greenlab;
using greenlab::testing::close_rel;

namespace {

FlowParams unit_weight(double alpha, double beta, double c = 0.0) {
    FlowParams params;
    params.alpha = alpha;
    params.beta = beta;
    params.c_const = c;
    params.weight = [](double) { return 1.0; };
    return params;
}

} // namespace

TEST_CASE("flow radius closed forms", "[flow]") {
    GreenProfile eucl(make_euclidean(3));
    for (double t : {0.25, 1.0, 2.0})
        REQUIRE(close_rel(flow_radius(eucl, 1.0, t), std::exp(2.0 * t), 1e-9));
    REQUIRE(flow_radius(eucl, 1.7, 0.0) == 1.7);

    // on the cone (b^2)' = 2 a^3 r, a linear flow
    GreenProfile cone(make_cone(4, 0.5));
    const double a3 = 0.125;
    REQUIRE(close_rel(flow_radius(cone, 1.0, 0.1), std::exp(2.0 * a3 * 0.1), 1e-9));

    // b along the flow is strictly increasing in t
    GreenProfile sub(make_sublinear(4, 0.5));
    double prev = sub.b(flow_radius(sub, 1.0, 0.0));
    for (double t : {0.3, 0.8, 1.5, 2.0}) {
        const double cur = sub.b(flow_radius(sub, 1.0, t));
        REQUIRE(cur > prev);
        prev = cur;
    }
}

TEST_CASE("v_beta closed forms on Euclidean space", "[flow]") {
    GreenProfile eucl(make_euclidean(3));
    const FlowDomain ball{0.0, 1.0};
    const double sphere = 4.0 * std::numbers::pi;

    // alpha 2, beta 1: integrand r^{-2} * 1 * r^2
    REQUIRE(close_rel(v_beta(eucl, ball, unit_weight(2.0, 1.0), 0.0), sphere, 1e-9));
    // volume of the unit ball
    REQUIRE(close_rel(v_beta(eucl, ball, unit_weight(0.0, 0.0), 0.0), sphere / 3.0, 1e-9));
    // flowed: |S^2| e^{2t} at t = 1/2
    REQUIRE(close_rel(v_beta(eucl, ball, unit_weight(2.0, 1.0), 0.5), sphere * std::numbers::e,
                      1e-8));

    REQUIRE_THROWS_AS(v_beta(eucl, ball, unit_weight(3.0, 0.0), 0.0), DivergentAtPole);
    REQUIRE_NOTHROW(v_beta(eucl, FlowDomain{0.5, 1.0}, unit_weight(3.0, 0.0), 0.0));
}

TEST_CASE("v_beta domain additivity and beta monotonicity", "[flow]") {
    GreenProfile profile(make_sublinear(4, 0.5));
    const auto params = unit_weight(2.0, 2.0);
    const double whole = v_beta(profile, FlowDomain{0.2, 1.5}, params, 0.3);
    const double left = v_beta(profile, FlowDomain{0.2, 0.7}, params, 0.3);
    const double right = v_beta(profile, FlowDomain{0.7, 1.5}, params, 0.3);
    REQUIRE(std::abs(whole - left - right) <= 1e-8 * (1.0 + std::abs(whole)));

    // V is nonincreasing in beta when |grad b| <= 1
    const FlowDomain ball{0.0, 1.0};
    double prev = v_beta(profile, ball, unit_weight(1.0, 0.0), 0.2);
    for (double beta : {1.0, 2.0, 4.0}) {
        const double cur = v_beta(profile, ball, unit_weight(1.0, beta), 0.2);
        REQUIRE(cur <= prev * (1.0 + 1e-12));
        prev = cur;
    }
}

TEST_CASE("thm 1.3 series: equality case and admissible entries", "[flow]") {
    const auto t_grid = numerics::linear_grid(0.0, 1.0, 11);
    const FlowDomain ball{0.0, 1.0};

    // Euclidean with alpha + beta = n: the weighted series is constant
    GreenProfile eucl(make_euclidean(4));
    auto equality = thm_1_3_series(eucl, ball, 2.0, 2.0, t_grid);
    REQUIRE(equality.verdict);
    for (std::size_t i = 0; i < equality.grid.size(); ++i)
        REQUIRE(std::abs(equality.slopes[i]) <= 1e-7 * (1.0 + std::abs(equality.values[i])));

    // strictly above the threshold the series decreases
    auto strict = thm_1_3_series(eucl, ball, 2.0, 3.0, t_grid);
    REQUIRE(strict.verdict);
    REQUIRE(strict.slopes[3] < -1e-4 * (1.0 + std::abs(strict.values[3])));

    auto cone = thm_1_3_series(GreenProfile(make_cone(4, 0.5)), ball, 2.0, 2.0, t_grid);
    REQUIRE(cone.verdict);

    auto sub = thm_1_3_series(GreenProfile(make_sublinear(4, 0.5)), ball, 1.0, 3.0, t_grid);
    REQUIRE(sub.verdict);

    REQUIRE_THROWS_AS(
        thm_1_3_series(GreenProfile(make_power_custom(4, 2.0)), ball, 2.0, 2.0, t_grid),
        AssumptionFails);
}

TEST_CASE("equality of the flow series detects the exact-cone geometry", "[flow]") {
    // at alpha + beta = n the series is flat exactly when the Hessian bound
    // is saturated everywhere, which happens on the Euclidean entry and on
    // every exact cone; sublinear entries decrease strictly
    const auto t_grid = numerics::linear_grid(0.0, 1.0, 11);
    const FlowDomain ball{0.0, 1.0};
    struct Entry {
        ManifoldSpec spec;
        bool saturates;
    };
    for (const auto& [spec, saturates] :
         {Entry{make_euclidean(4), true}, Entry{make_cone(4, 0.5), true},
          Entry{make_sublinear(4, 0.5), false}}) {
        auto series = thm_1_3_series(GreenProfile(spec), ball, 2.0, 2.0, t_grid);
        double largest = 0.0;
        for (std::size_t i = 0; i < series.grid.size(); ++i)
            largest = std::max(largest,
                               std::abs(series.slopes[i]) / (1.0 + std::abs(series.values[i])));
        REQUIRE((largest <= 1e-7) == saturates);
    }
}

TEST_CASE("thm 1.4 series: weights", "[flow]") {
    GreenProfile eucl(make_euclidean(4));
    const auto t_grid = numerics::linear_grid(0.0, 1.0, 11);
    const FlowDomain ball{0.0, 1.0};
    const double c = 2.0;

    FlowParams sharp;
    sharp.alpha = 2.0;
    sharp.beta = 2.0;
    sharp.c_const = c;
    sharp.weight = [c](double t) { return std::exp(-c * 2.0 * t); };
    auto via14 = thm_1_4_series(eucl, ball, sharp, t_grid);
    auto via13 = thm_1_3_series(eucl, ball, 2.0, 2.0, t_grid);
    for (std::size_t i = 0; i < via13.grid.size(); ++i)
        REQUIRE(std::abs(via14.values[i] - via13.values[i]) <=
                1e-12 * (1.0 + std::abs(via13.values[i])));

    FlowParams extra = sharp;
    extra.weight = [c](double t) { return std::exp(-(c * 2.0 + 1.0) * t); };
    auto decaying = thm_1_4_series(eucl, ball, extra, t_grid);
    REQUIRE(decaying.verdict);
    REQUIRE(decaying.slopes[5] < -1e-4);

    FlowParams growing = sharp;
    growing.weight = [](double t) { return std::exp(t); };
    REQUIRE_THROWS_AS(thm_1_4_series(eucl, ball, growing, t_grid), WeightRatioViolated);
}

TEST_CASE("proof inequality", "[flow]") {
    const auto t_grid = numerics::linear_grid(0.0, 1.0, 11);
    const FlowDomain ball{0.0, 1.0};

    // Euclidean equality case: the chain is tight
    GreenProfile eucl(make_euclidean(4));
    FlowParams params;
    params.alpha = 2.0;
    params.beta = 2.0;
    params.c_const = 2.0;
    params.weight = [](double t) { return std::exp(-4.0 * t); };
    auto eq = proof_inequality_check(eucl, ball, params, t_grid);
    REQUIRE(eq.report.verdict);
    for (std::size_t i = 0; i < eq.grid.size(); ++i) {
        const double scale = 1.0 + std::max(std::abs(eq.slopes[i]), std::abs(eq.bounds[i]));
        REQUIRE(std::abs(eq.slopes[i] - eq.bounds[i]) <= 1e-7 * scale);
    }

    // cone with its own constant
    GreenProfile cone(make_cone(4, 0.5));
    FlowParams cone_params;
    cone_params.alpha = 2.0;
    cone_params.beta = 2.0;
    cone_params.c_const = 0.25;
    cone_params.weight = [](double t) { return std::exp(-0.5 * t); };
    REQUIRE(proof_inequality_check(cone, ball, cone_params, t_grid).report.verdict);

    // beta = 0 kills the Hessian term; needs an annulus since alpha >= n
    GreenProfile sub(make_sublinear(4, 0.5));
    FlowParams beta0;
    beta0.alpha = 4.5;
    beta0.beta = 0.0;
    beta0.c_const = 2.0;
    beta0.weight = [](double) { return 1.0; };
    auto reduced = proof_inequality_check(sub, FlowDomain{0.3, 1.0}, beta0, t_grid);
    REQUIRE(reduced.report.verdict);
}

TEST_CASE("series csv export", "[flow]") {
    GreenProfile eucl(make_euclidean(4));
    auto series = thm_1_3_series(eucl, FlowDomain{0.0, 1.0}, 2.0, 2.0,
                                 numerics::linear_grid(0.0, 0.5, 3));
    const auto text = export_series_csv(series);
    REQUIRE(text.rfind("t,value,slope,bound_rhs,violation\n", 0) == 0);
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 4);
}
