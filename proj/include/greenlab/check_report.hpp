#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "greenlab/numerics.hpp"

namespace greenlab {

/// Machine-readable verdict of one theorem-level check.
struct CheckReport {
    std::string name;
    bool verdict = false;
    double max_violation = 0.0;  // in units of the check's scale
    double witness = 0.0;        // grid point realising the worst violation
    double tolerance_used = 0.0;
    std::vector<std::string> notes;
};

/// A quantity sampled along a grid together with numerical slopes; the
/// verdict certifies monotonicity up to tol_mono in units of the local scale
/// 1 + |value|.
struct MonotoneSeries {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> slopes;
    double max_violation = 0.0; // largest positive scaled slope
    double tol_mono = 1e-6;
    bool verdict = false;
};

/// Sample value_fn on the grid with Richardson slopes; the verdict certifies
/// that no slope exceeds tol_mono in units of 1 + |value|.  step_at controls
/// the differentiation step (defaults to a fraction of the grid spacing).
inline MonotoneSeries build_monotone_series(const std::function<double(double)>& value_fn,
                                            std::span<const double> grid, double tol_mono,
                                            const std::function<double(double)>& step_at = {}) {
    MonotoneSeries series;
    series.tol_mono = tol_mono;
    series.grid.assign(grid.begin(), grid.end());
    const double spacing =
        grid.size() > 1 ? grid[1] - grid[0] : std::max(0.05, 0.05 * std::abs(grid[0]));
    series.values.reserve(grid.size());
    series.slopes.reserve(grid.size());
    double worst = 0.0;
    for (double x : grid) {
        const double h = step_at ? step_at(x) : 0.4 * spacing;
        const double value = value_fn(x);
        const double slope = numerics::derive(value_fn, x, h, 6).value;
        series.values.push_back(value);
        series.slopes.push_back(slope);
        worst = std::max(worst, std::max(slope, 0.0) / (1.0 + std::abs(value)));
    }
    series.max_violation = worst;
    series.verdict = worst <= tol_mono;
    return series;
}

namespace csv {

inline std::string fmt(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.12g", x);
    return buffer;
}

} // namespace csv

} // namespace greenlab
