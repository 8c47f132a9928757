#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "greenlab/errors.hpp"

// Deterministic scalar numerics: adaptive quadrature (with endpoint
// singularities and infinite tails), Richardson differentiation, an embedded
// Runge-Kutta integrator and bracketing root finding.  Every routine is a pure
// function of its inputs with a fixed subdivision order, so repeated runs are
// bit-identical.

namespace greenlab::numerics {

using Fn = std::function<double(double)>;

struct Tolerance {
    double rel = 1e-10;
    double abs = 1e-12;

    static Tolerance quadrature() { return {1e-10, 1e-12}; }
    static Tolerance ode() { return {1e-9, 1e-12}; }
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0; // absolute
    std::size_t evaluations = 0;
};

struct DeriveResult {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

// Gauss(7)-Kronrod(15) nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kGk15Nodes = {
    0.9914553711208126392069, 0.9491079123427585245262,
    0.8648644233597690727897, 0.7415311855993944398639,
    0.5860872354676911302941, 0.4058451513773971669066,
    0.2077849550078984676007, 0.0};
inline constexpr std::array<double, 8> kGk15Weights = {
    0.0229353220105292249637, 0.0630920926299785532907,
    0.1047900103222501838399, 0.1406532597155259187452,
    0.1690047266392679028266, 0.1903505780647854099133,
    0.2044329400752988924142, 0.2094821410847278280130};
inline constexpr std::array<double, 4> kGauss7Weights = {
    0.1294849661688696932706, 0.2797053914892766679015,
    0.3818300505051189449504, 0.4179591836734693877551};

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
};

inline Panel gk15(const Fn& fn, double a, double b, std::size_t& evaluations) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kronrod = 0.0;
    double gauss = 0.0;
    for (std::size_t i = 0; i < 7; ++i) {
        const double off = half * kGk15Nodes[i];
        const double f1 = fn(mid - off);
        const double f2 = fn(mid + off);
        evaluations += 2;
        if (!std::isfinite(f1) || !std::isfinite(f2))
            throw NonFinite("integrand returned a non-finite value inside [" +
                            std::to_string(a) + ", " + std::to_string(b) + "]");
        kronrod += kGk15Weights[i] * (f1 + f2);
        if (i % 2 == 1) gauss += kGauss7Weights[i / 2] * (f1 + f2);
    }
    const double fc = fn(mid);
    ++evaluations;
    if (!std::isfinite(fc))
        throw NonFinite("integrand returned a non-finite value at " + std::to_string(mid));
    kronrod += kGk15Weights[7] * fc;
    gauss += kGauss7Weights[3] * fc;
    return {a, b, kronrod * half, std::abs(kronrod - gauss) * std::abs(half)};
}

struct PanelWorse {
    bool operator()(const Panel& x, const Panel& y) const {
        if (x.error != y.error) return x.error < y.error;
        return x.a > y.a; // deterministic tie break
    }
};

} // namespace detail

/// Adaptive Gauss-Kronrod integration over the panels delimited by
/// `breakpoints` (sorted, at least two entries).  Endpoints are never
/// evaluated, so integrable power singularities at the boundary are tolerated.
inline QuadratureResult integrate_partitioned(const Fn& fn,
                                              std::span<const double> breakpoints,
                                              Tolerance tol = Tolerance::quadrature(),
                                              std::size_t max_subdivisions = 4000) {
    if (breakpoints.size() < 2) throw Error("integrate: need at least one panel");
    std::priority_queue<detail::Panel, std::vector<detail::Panel>, detail::PanelWorse> heap;
    std::size_t evaluations = 0;
    double value = 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw Error("integrate: breakpoints must be strictly increasing");
        auto p = detail::gk15(fn, breakpoints[i], breakpoints[i + 1], evaluations);
        value += p.value;
        error += p.error;
        heap.push(p);
    }
    std::size_t splits = 0;
    while (error > std::max(tol.abs, tol.rel * std::abs(value))) {
        if (splits >= max_subdivisions)
            throw NonConvergence("integrate: subdivision limit reached, error " +
                                 std::to_string(error));
        const detail::Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b)
            throw NonConvergence("integrate: interval collapsed before reaching tolerance");
        auto left = detail::gk15(fn, worst.a, mid, evaluations);
        auto right = detail::gk15(fn, mid, worst.b, evaluations);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++splits;
    }
    return {value, error, evaluations};
}

/// Adaptive integration of fn over [a, b].
inline QuadratureResult integrate(const Fn& fn, double a, double b,
                                  Tolerance tol = Tolerance::quadrature(),
                                  std::size_t max_subdivisions = 4000) {
    if (!(a < b)) throw Error("integrate: requires a < b");
    const std::array<double, 2> pts = {a, b};
    return integrate_partitioned(fn, pts, tol, max_subdivisions);
}

/// Integration of fn over [a, b] when fn behaves like (x-a)^s near a with
/// s > -1.  The substitution x = a + u^k flattens the singularity; k is picked
/// so the transformed integrand has several continuous derivatives at u = 0.
inline QuadratureResult integrate_power_endpoint(const Fn& fn, double a, double b,
                                                 double singularity_exponent,
                                                 Tolerance tol = Tolerance::quadrature()) {
    if (!(singularity_exponent > -1.0))
        throw Error("integrate_power_endpoint: exponent must exceed -1");
    const double k = std::clamp(std::ceil(4.0 / (singularity_exponent + 1.0)), 1.0, 48.0);
    if (k == 1.0) return integrate(fn, a, b, tol);
    const double upper = std::pow(b - a, 1.0 / k);
    auto transformed = [&fn, a, k](double u) {
        return fn(a + std::pow(u, k)) * k * std::pow(u, k - 1.0);
    };
    return integrate_partitioned(transformed, std::array<double, 2>{0.0, upper}, tol);
}

/// Integral of fn over [a, infinity).  The caller declares a lower bound on the
/// power decay of fn (fn ~ s^-p with p > 1); intervals are doubled and the
/// remaining tail is closed analytically with a locally fitted decay exponent,
/// never below the declared one.  Convergence is accepted once two consecutive
/// remainder estimates agree.
inline QuadratureResult integrate_tail(const Fn& fn, double a, double decay_exponent,
                                       Tolerance tol = Tolerance::quadrature()) {
    if (!(decay_exponent > 1.0))
        throw DivergentTail("integrate_tail: declared decay exponent " +
                            std::to_string(decay_exponent) + " <= 1");
    if (!(a > 0.0)) throw Error("integrate_tail: requires a > 0");

    auto remainder = [&](double s, double fs, double p) {
        return fs == 0.0 ? 0.0 : fs * s / (p - 1.0);
    };

    std::size_t evaluations = 0;
    double cut = a;
    double f_prev = fn(cut);
    ++evaluations;
    if (!std::isfinite(f_prev)) throw NonFinite("integrate_tail: fn not finite at lower limit");
    double partial = 0.0;
    double quad_error = 0.0;
    double tail_prev = remainder(cut, f_prev, decay_exponent);
    int stable = 0;

    const Tolerance block_tol{0.25 * tol.rel, tol.abs / 64.0};
    for (int doubling = 0; doubling < 60; ++doubling) {
        const double next = 2.0 * cut;
        const auto block = integrate(fn, cut, next, block_tol);
        partial += block.value;
        quad_error += block.error_estimate;
        evaluations += block.evaluations;

        const double f_cur = fn(next);
        ++evaluations;
        if (!std::isfinite(f_cur)) throw NonFinite("integrate_tail: fn not finite at " +
                                                   std::to_string(next));
        double p_eff = decay_exponent;
        if (f_prev > 0.0 && f_cur > 0.0) {
            const double fitted = std::log2(f_prev / f_cur);
            if (std::isfinite(fitted)) p_eff = std::min(std::max(decay_exponent, fitted), 80.0);
        }
        const double tail_cur = remainder(next, f_cur, p_eff);
        const double consistency = std::abs(tail_prev - (block.value + tail_cur));
        const double total = partial + tail_cur;
        const double target = std::max(tol.abs, tol.rel * std::abs(total));

        const bool tail_negligible = std::abs(tail_cur) <= 0.5 * target;
        if (tail_negligible || consistency <= 0.25 * target) {
            ++stable;
            if (tail_negligible || stable >= 2)
                return {total, quad_error + consistency, evaluations};
        } else {
            stable = 0;
        }
        cut = next;
        f_prev = f_cur;
        tail_prev = tail_cur;
    }
    throw NonConvergence("integrate_tail: remainder did not stabilise (declared exponent " +
                         std::to_string(decay_exponent) + ")");
}

/// Central difference with Richardson extrapolation (Neville tableau, step
/// halving).  The error is estimated from the disagreement between
/// extrapolation levels.
inline DeriveResult derive(const Fn& fn, double x, double h0, int max_rounds = 11) {
    if (!(h0 > 0.0)) throw Error("derive: step must be positive");
    constexpr int kMaxRounds = 11;
    const int rounds = std::clamp(max_rounds, 3, kMaxRounds);
    double tableau[kMaxRounds][kMaxRounds];
    auto central = [&](double h) {
        const double hi = fn(x + h);
        const double lo = fn(x - h);
        if (!std::isfinite(hi) || !std::isfinite(lo))
            throw NonFinite("derive: fn not finite near " + std::to_string(x));
        return (hi - lo) / (2.0 * h);
    };

    double h = h0;
    tableau[0][0] = central(h);
    DeriveResult best{tableau[0][0], std::numeric_limits<double>::max()};
    for (int i = 1; i < rounds; ++i) {
        h *= 0.5;
        tableau[0][i] = central(h);
        double factor = 4.0;
        for (int j = 1; j <= i; ++j) {
            tableau[j][i] =
                (factor * tableau[j - 1][i] - tableau[j - 1][i - 1]) / (factor - 1.0);
            factor *= 4.0;
            const double disagreement = std::max(std::abs(tableau[j][i] - tableau[j - 1][i]),
                                                 std::abs(tableau[j][i] - tableau[j - 1][i - 1]));
            if (disagreement < best.error) best = {tableau[j][i], disagreement};
        }
        if (std::abs(tableau[i][i] - tableau[i - 1][i - 1]) >= 4.0 * best.error && i > 2)
            break; // further refinement only amplifies roundoff
    }
    return best;
}

using OdeRhs = std::function<double(double, double)>;

namespace detail {

// Dormand-Prince 5(4) coefficients.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

} // namespace detail

/// Integrate y' = rhs(t, y) from (t0, y0) to t1 with an embedded
/// Dormand-Prince 5(4) pair; works in either time direction.
inline double solve_to(const OdeRhs& rhs, double t0, double y0, double t1,
                       Tolerance tol = Tolerance::ode()) {
    using D = detail::Dopri5;
    if (t0 == t1) return y0;
    const double direction = t1 > t0 ? 1.0 : -1.0;
    double t = t0;
    double y = y0;
    double h = direction * std::max(1e-6, std::abs(t1 - t0) / 16.0);
    double k1 = rhs(t, y);
    if (!std::isfinite(k1)) throw NonFinite("solve_to: rhs not finite at start");

    for (int step = 0; step < 100000; ++step) {
        if ((t - t1) * direction >= 0.0) return y;
        if (std::abs(h) < 1e-14 * (1.0 + std::abs(t)))
            throw StepUnderflow("solve_to: step size underflow at t = " + std::to_string(t));
        if ((t + h - t1) * direction > 0.0) h = t1 - t;

        const double k2 = rhs(t + D::c2 * h, y + h * D::a21 * k1);
        const double k3 = rhs(t + D::c3 * h, y + h * (D::a31 * k1 + D::a32 * k2));
        const double k4 = rhs(t + D::c4 * h, y + h * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3));
        const double k5 = rhs(t + D::c5 * h,
                              y + h * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4));
        const double k6 = rhs(t + h, y + h * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 +
                                              D::a64 * k4 + D::a65 * k5));
        const double y_new =
            y + h * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
        const double k7 = rhs(t + h, y_new);
        if (!std::isfinite(y_new) || !std::isfinite(k7))
            throw NonFinite("solve_to: solution not finite at t = " + std::to_string(t + h));

        const double err = h * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 +
                                D::e6 * k6 + D::e7 * k7);
        const double scale = tol.abs + tol.rel * std::max(std::abs(y), std::abs(y_new));
        const double err_norm = std::abs(err) / scale;
        if (err_norm <= 1.0) {
            t += h;
            y = y_new;
            k1 = k7; // first-same-as-last
        }
        const double growth =
            err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
        h *= growth;
    }
    throw NonConvergence("solve_to: step limit reached");
}

/// Sample the solution of y' = rhs(t, y), y(0) = y0, at the strictly
/// increasing grid points.
inline std::vector<double> solve_ode(const OdeRhs& rhs, double y0,
                                     std::span<const double> t_grid,
                                     Tolerance tol = Tolerance::ode()) {
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
        if (!(t_grid[i] < t_grid[i + 1])) throw Error("solve_ode: grid must be increasing");
    std::vector<double> out(t_grid.size());

    // march backward over negative targets, forward over the rest
    double t = 0.0, y = y0;
    for (std::size_t idx = t_grid.size(); idx-- > 0;) {
        if (t_grid[idx] >= 0.0) continue;
        y = solve_to(rhs, t, y, t_grid[idx], tol);
        t = t_grid[idx];
        out[idx] = y;
    }
    t = 0.0;
    y = y0;
    for (std::size_t idx = 0; idx < t_grid.size(); ++idx) {
        if (t_grid[idx] < 0.0) continue;
        y = solve_to(rhs, t, y, t_grid[idx], tol);
        t = t_grid[idx];
        out[idx] = y;
    }
    return out;
}

/// Bracketing root finder (bisection with Illinois-weighted secant steps).
inline double find_root(const Fn& fn, double lo, double hi,
                        Tolerance tol = Tolerance::quadrature()) {
    double fa = fn(lo);
    double fb = fn(hi);
    if (!std::isfinite(fa) || !std::isfinite(fb))
        throw NonFinite("find_root: fn not finite at the bracket");
    if (fa == 0.0) return lo;
    if (fb == 0.0) return hi;
    if (fa * fb > 0.0)
        throw NoSignChange("find_root: fn has the same sign at both bracket ends");

    double a = lo, b = hi;
    for (int iter = 0; iter < 200; ++iter) {
        double m = b - fb * (b - a) / (fb - fa);
        const double width = std::abs(b - a);
        if (!std::isfinite(m) || m <= std::min(a, b) || m >= std::max(a, b))
            m = 0.5 * (a + b);
        const double fm = fn(m);
        if (!std::isfinite(fm)) throw NonFinite("find_root: fn not finite at " + std::to_string(m));
        if (std::abs(fm) <= tol.abs || width <= tol.rel * std::abs(m) + 1e-15 * (1.0 + std::abs(m)))
            return m;
        if (fm * fb < 0.0) {
            a = b;
            fa = fb;
        } else {
            fa *= 0.5; // Illinois trick: keep the stale end from pinning the secant
        }
        b = m;
        fb = fm;
    }
    return b;
}

/// count geometrically spaced points on [lo, hi], endpoints included.
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw Error("log_grid: bad parameters");
    std::vector<double> grid(count);
    const double step = std::log(hi / lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

/// count uniformly spaced points on [lo, hi], endpoints included.
inline std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
    if (!(hi > lo) || count < 2) throw Error("linear_grid: bad parameters");
    std::vector<double> grid(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid[i] = lo + step * static_cast<double>(i);
    grid.back() = hi;
    return grid;
}

} // namespace greenlab::numerics
