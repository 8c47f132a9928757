#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "greenlab/check_report.hpp"
#include "greenlab/curvature.hpp"
#include "greenlab/errors.hpp"
#include "greenlab/flow_monotone.hpp"
#include "greenlab/green.hpp"
#include "greenlab/level_monotone.hpp"
#include "greenlab/manifold.hpp"
#include "greenlab/numerics.hpp"
#include "greenlab/version.hpp"

// Configuration-driven scenario runner: builds manifold specs from JSON,
// executes the requested check suites in declared order, and emits CSV
// artifacts, gnuplot scripts and a machine-readable summary.  Given the same
// config and tool version, every artifact is byte-identical across runs
// (wall time is reported in a single summary field and nowhere else).

namespace greenlab {

struct GridSpec {
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

struct ManifoldConfig {
    std::string type;
    int n = 3;
    double a = 1.0;
    double alpha = 0.5;
    double eps = 0.0;
    double r0 = 1.0;
    double coeff = 1.0;
    std::optional<double> cross_volume;
};

struct RunConfig {
    std::vector<ManifoldConfig> manifolds;
    std::vector<std::string> checks;
    GridSpec r_grid{0.1, 100.0, 61};
    GridSpec t_grid{0.0, 2.0, 41};
    double tol_mono = 1e-6;
    std::string output_dir = "greenlab_out";
    std::string format = "both"; // csv | json | both
    int jobs = 1;
    nlohmann::ordered_json echo;
};

inline const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> ids = {
        "validate",  "assumption",   "h_oracle",       "hess_decay",
        "curvature_hypotheses",      "thm11",          "thm11_identity",
        "thm13",     "thm14",        "proof_ineq",     "thm15",
        "dirichlet", "remark31",     "gradient_estimate",
        "lemma22",   "trace_identity"};
    return ids;
}

namespace detail {

inline GridSpec parse_grid(const nlohmann::json& node, const std::string& path) {
    GridSpec grid;
    try {
        grid.min = node.at("min").get<double>();
        grid.max = node.at("max").get<double>();
        grid.count = node.at("count").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw BadGrid(path + ": " + e.what());
    }
    if (!(grid.min < grid.max) || grid.count < 2)
        throw BadGrid(path + ": grid must be strictly increasing with at least two points");
    return grid;
}

inline ManifoldConfig parse_manifold(const nlohmann::json& node) {
    ManifoldConfig mc;
    try {
        mc.type = node.at("type").get<std::string>();
        mc.n = node.value("n", 3);
        mc.a = node.value("a", 1.0);
        mc.alpha = node.value("alpha", 0.5);
        mc.eps = node.value("eps", 0.0);
        mc.r0 = node.value("r0", 1.0);
        mc.coeff = node.value("coeff", 1.0);
        if (node.contains("cross_volume")) mc.cross_volume = node["cross_volume"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifold: ") + e.what());
    }
    const std::set<std::string> types = {"euclidean", "cone", "perturbed_cone", "sublinear",
                                         "custom"};
    if (!types.count(mc.type)) throw ParseError("unknown manifold type '" + mc.type + "'");
    return mc;
}

} // namespace detail

/// Builds the catalog entry named by the config; parameter errors surface as
/// the corresponding manifold exceptions at run time, not parse time.
inline ManifoldSpec make_spec(const ManifoldConfig& mc) {
    ManifoldSpec spec;
    if (mc.type == "euclidean")
        spec = make_euclidean(mc.n);
    else if (mc.type == "cone")
        spec = make_cone(mc.n, mc.a);
    else if (mc.type == "perturbed_cone")
        spec = make_perturbed_cone(mc.n, mc.a, mc.eps, mc.r0);
    else if (mc.type == "sublinear")
        spec = make_sublinear(mc.n, mc.alpha);
    else if (mc.type == "custom")
        spec = make_power_custom(mc.n, mc.alpha, mc.coeff);
    else
        throw ParseError("unknown manifold type '" + mc.type + "'");
    if (mc.cross_volume) {
        spec.cross_volume = *mc.cross_volume;
        spec.label += "[cross_volume=" + csv::fmt(*mc.cross_volume) + "]";
    }
    return spec;
}

inline RunConfig parse_config(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what());
    }

    RunConfig config;
    if (root.contains("manifolds")) {
        if (!root["manifolds"].is_array() || root["manifolds"].empty())
            throw ParseError("manifolds: expected a non-empty array");
        for (const auto& node : root["manifolds"])
            config.manifolds.push_back(detail::parse_manifold(node));
    } else if (root.contains("manifold")) {
        config.manifolds.push_back(detail::parse_manifold(root["manifold"]));
    } else {
        throw ParseError("config needs a 'manifold' object or 'manifolds' array");
    }

    if (root.contains("checks")) {
        if (!root["checks"].is_array()) throw ParseError("checks: expected an array");
        const auto& known = known_checks();
        for (const auto& node : root["checks"]) {
            const std::string id = node.get<std::string>();
            if (std::find(known.begin(), known.end(), id) == known.end())
                throw UnknownCheck("unknown check id '" + id + "'");
            config.checks.push_back(id);
        }
    }
    if (config.checks.empty()) config.checks = {"validate", "assumption"};

    if (root.contains("grids")) {
        const auto& grids = root["grids"];
        if (grids.contains("r")) config.r_grid = detail::parse_grid(grids["r"], "grids.r");
        if (grids.contains("t")) config.t_grid = detail::parse_grid(grids["t"], "grids.t");
        if (!(config.r_grid.min > 0.0)) throw BadGrid("grids.r: radii must be positive");
    }
    if (root.contains("tolerances")) {
        config.tol_mono = root["tolerances"].value("mono", config.tol_mono);
        if (!(config.tol_mono > 0.0)) throw ParseError("tolerances.mono must be positive");
    }
    config.output_dir = root.value("output_dir", config.output_dir);
    config.format = root.value("format", config.format);
    if (config.format != "csv" && config.format != "json" && config.format != "both")
        throw ParseError("format must be csv, json or both");

    config.echo = nlohmann::ordered_json::parse(text);
    return config;
}

struct ManifoldRunResult {
    std::string label;
    ValidationReport validation;
    std::optional<AssumptionVerdict> assumption;
    std::vector<CheckReport> checks;
    std::map<std::string, std::string> artifacts; // filename -> content
};

struct RunSummary {
    std::vector<ManifoldRunResult> manifolds;
    bool all_passed = true;
    double wall_ms = 0.0;
    nlohmann::ordered_json config_echo;
};

namespace detail {

/// admissible (alpha, beta) sweep for dimension n: six pairs with beta >= 0,
/// alpha + beta >= n and alpha < n (ball domains)
inline std::vector<std::pair<double, double>> sweep_pairs(int n) {
    return {{n - 2.0, 2.0}, {1.0, n - 1.0}, {0.0, double(n)},
            {n - 1.0, 2.0}, {2.0, n - 1.0}, {1.0, double(n)}};
}

inline std::string pair_tag(double alpha, double beta) {
    std::string tag = "a" + csv::fmt(alpha) + "_b" + csv::fmt(beta);
    for (auto& ch : tag)
        if (ch == '.') ch = 'p';
    return tag;
}

inline std::string gnuplot_script(const std::string& csv_name, const std::string& title,
                                  const std::vector<std::pair<int, std::string>>& columns,
                                  bool log_x) {
    std::ostringstream out;
    out << "set datafile separator ','\n";
    out << "set key autotitle columnhead\n";
    out << "set title '" << title << "'\n";
    if (log_x) out << "set logscale x\n";
    out << "plot ";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out << ", \\\n     ";
        out << "'" << csv_name << "' using 1:" << columns[i].first << " with lines title '"
            << columns[i].second << "'";
    }
    out << '\n';
    return out.str();
}

/// Executes the requested checks on one manifold, in declared order.
inline ManifoldRunResult run_one(const ManifoldConfig& mc, const RunConfig& config,
                                 const std::string& prefix) {
    ManifoldRunResult result;
    const ManifoldSpec spec = make_spec(mc);
    result.label = spec.label;
    result.validation = validate(spec);

    const auto r_grid = numerics::log_grid(config.r_grid.min, config.r_grid.max,
                                           config.r_grid.count);
    const auto t_grid = numerics::linear_grid(config.t_grid.min, config.t_grid.max,
                                              config.t_grid.count);
    const auto audit_grid = numerics::log_grid(1e-4, 1e4, 50);

    std::optional<GreenProfile> profile;
    std::optional<CurvatureProfile> curvature;
    auto need_profile = [&]() -> GreenProfile& {
        if (!profile) {
            profile.emplace(spec);
            result.artifacts[prefix + "_profile.csv"] = export_profile_csv(*profile, r_grid);
            result.artifacts[prefix + "_profile.gp"] = gnuplot_script(
                prefix + "_profile.csv", spec.label,
                {{3, "b"}, {4, "grad_b"}, {5, "lam_rad"}, {6, "lam_tan"}}, true);
        }
        return *profile;
    };
    auto need_curvature = [&]() -> CurvatureProfile& {
        if (!curvature) {
            curvature.emplace(spec);
            result.artifacts[prefix + "_curvature.csv"] = export_curvature_csv(*curvature, r_grid);
            result.artifacts[prefix + "_curvature.gp"] = gnuplot_script(
                prefix + "_curvature.csv", spec.label + " curvature",
                {{2, "k_rad"}, {3, "k_tan"}, {6, "nabla_ric_norm"}}, true);
        }
        return *curvature;
    };
    auto need_assumption = [&]() -> AssumptionVerdict& {
        if (!result.assumption) {
            result.assumption = assumption_constant(need_profile(), audit_grid);
            std::ostringstream curve;
            curve << "r,eigen_max\n";
            for (const auto& [r, value] : result.assumption->profile)
                curve << csv::fmt(r) << ',' << csv::fmt(value) << '\n';
            result.artifacts[prefix + "_assumption.csv"] = curve.str();
        }
        return *result.assumption;
    };
    auto require_constant = [&]() -> double {
        const auto& verdict = need_assumption();
        if (!verdict.holds || !verdict.constant_c)
            throw AssumptionFails("bounded-Hessian constant unbounded for " + spec.label);
        return *verdict.constant_c;
    };
    bool level_csv_written = false;
    auto write_level_csv = [&]() {
        if (level_csv_written) return;
        const double c = require_constant();
        result.artifacts[prefix + "_level.csv"] =
            export_level_csv(need_profile(), need_curvature(), c, r_grid);
        result.artifacts[prefix + "_level.gp"] =
            gnuplot_script(prefix + "_level.csv", spec.label + " level quantities",
                           {{2, "A"}, {5, "V"}, {7, "Q"}}, true);
        level_csv_written = true;
    };

    for (const std::string& id : config.checks) {
        CheckReport report;
        report.name = id;
        try {
            if (id == "validate") {
                report.verdict = result.validation.all_ok();
                report.notes = result.validation.notes;
                report.notes.push_back(result.validation.nonparabolic ? "nonparabolic"
                                                                      : "parabolic");
            } else if (id == "assumption") {
                const auto& verdict = need_assumption();
                report.verdict = verdict.holds;
                if (verdict.constant_c) {
                    report.notes.push_back("C = " + csv::fmt(*verdict.constant_c));
                    report.witness = verdict.witness_r;
                } else {
                    report.notes.push_back("unbounded");
                }
                for (const auto& note : verdict.notes) report.notes.push_back(note);
            } else if (id == "h_oracle") {
                auto& p = need_profile();
                report.tolerance_used = 1e-8;
                for (double r : audit_grid) {
                    const auto sample = h_oracle(p, r);
                    const auto [rad, tan] = h_reconstructed_eigenvalues(p, sample);
                    const double dev = std::max(
                        std::abs(rad - p.lam_rad(r)) /
                            (1.0 + std::max(std::abs(rad), std::abs(p.lam_rad(r)))),
                        std::abs(tan - p.lam_tan(r)) /
                            (1.0 + std::max(std::abs(tan), std::abs(p.lam_tan(r)))));
                    if (dev > report.max_violation) {
                        report.max_violation = dev;
                        report.witness = r;
                    }
                }
                report.verdict = report.max_violation <= report.tolerance_used;
                if (spec.warping.alpha == 1.0 && !spec.warping.origin_smooth) {
                    // critical linear-growth case: record the fitted growth of
                    // hdot without a verdict
                    std::vector<double> xs, ys;
                    for (double r : numerics::log_grid(10.0, 1e3, 30)) {
                        xs.push_back(std::log(r));
                        ys.push_back(std::log(std::abs(h_oracle(p, r).hdot)));
                    }
                    double sx = 0, sy = 0, sxx = 0, sxy = 0;
                    for (std::size_t i = 0; i < xs.size(); ++i) {
                        sx += xs[i];
                        sy += ys[i];
                        sxx += xs[i] * xs[i];
                        sxy += xs[i] * ys[i];
                    }
                    const double m = xs.size();
                    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
                    report.notes.push_back("hdot growth exponent ~ " + csv::fmt(slope) +
                                           " (critical alpha = 1, no verdict)");
                }
            } else if (id == "hess_decay") {
                const auto tail_grid = numerics::log_grid(10.0, 1e3, 60);
                const auto decay = hess_decay_profile(need_profile(), tail_grid);
                report.verdict = decay.is_exponential_type;
                report.max_violation = decay.sup_residual;
                report.tolerance_used = 0.1;
                report.notes.push_back("c5 = " + csv::fmt(decay.fit_exponent));
                report.notes.push_back("power slope = " + csv::fmt(decay.power_slope));
                std::ostringstream csv_text;
                csv_text << "r,H\n";
                for (const auto& [r, H] : decay.samples)
                    csv_text << csv::fmt(r) << ',' << csv::fmt(H) << '\n';
                result.artifacts[prefix + "_hess_decay.csv"] = csv_text.str();
            } else if (id == "curvature_hypotheses") {
                const auto hypo =
                    check_thm_1_2_hypotheses(need_curvature(), numerics::log_grid(1e-2, 1e2, 40));
                report.verdict = true; // the report carries flags, not a pass/fail claim
                report.notes.push_back(std::string("radial_curvature_nonneg: ") +
                                       (hypo.radial_curvature_nonneg ? "yes" : "no"));
                report.notes.push_back(std::string("ricci_nonneg: ") +
                                       (hypo.ricci_nonneg ? "yes" : "no"));
                report.notes.push_back(std::string("parallel_ricci: ") +
                                       (hypo.parallel_ricci ? "yes" : "no"));
                if (hypo.rm_decay_K)
                    report.notes.push_back("rm_decay_K = " + csv::fmt(*hypo.rm_decay_K));
                if (hypo.nabla_ric_decay_L)
                    report.notes.push_back("nabla_ric_decay_L = " +
                                           csv::fmt(*hypo.nabla_ric_decay_L));
                for (const auto& note : hypo.notes) report.notes.push_back(note);
            } else if (id == "thm11") {
                auto series = a_series(need_profile(), r_grid);
                const auto hypo =
                    check_thm_1_2_hypotheses(need_curvature(), numerics::log_grid(1e-2, 1e2, 40));
                report.max_violation = series.max_violation;
                report.tolerance_used = config.tol_mono;
                if (hypo.ricci_nonneg) {
                    report.verdict = series.max_violation <= config.tol_mono;
                } else {
                    report.verdict = true;
                    report.notes.push_back(
                        "monotonicity not asserted: ambient Ricci hypothesis fails");
                }
                write_level_csv();
            } else if (id == "thm11_identity") {
                auto& p = need_profile();
                auto& curv = need_curvature();
                report.tolerance_used = 1e-4;
                for (double r : numerics::log_grid(0.3, 30.0, 10)) {
                    const auto one = a_prime_identity_check(p, r, curv);
                    if (one.max_violation > report.max_violation) {
                        report.max_violation = one.max_violation;
                        report.witness = r;
                    }
                }
                report.verdict = report.max_violation <= report.tolerance_used;
                write_level_csv();
            } else if (id == "thm13" || id == "thm14" || id == "proof_ineq") {
                auto& p = need_profile();
                const double c = require_constant();
                const FlowDomain ball{0.0, 1.0};
                report.tolerance_used = config.tol_mono;
                bool all_ok = true;
                for (const auto& [alpha, beta] : sweep_pairs(spec.n)) {
                    FlowParams params;
                    params.alpha = alpha;
                    params.beta = beta;
                    params.c_const = c;
                    const std::string tag = pair_tag(alpha, beta);
                    if (id == "proof_ineq") {
                        params.weight = [c, beta = beta](double t) {
                            return std::exp(-c * beta * t);
                        };
                        auto rows = proof_inequality_check(p, ball, params, t_grid);
                        all_ok = all_ok && rows.report.verdict;
                        if (rows.report.max_violation > report.max_violation) {
                            report.max_violation = rows.report.max_violation;
                            report.witness = rows.report.witness;
                        }
                        result.artifacts[prefix + "_proof_ineq_" + tag + ".csv"] =
                            export_proof_csv(rows);
                    } else {
                        MonotoneSeries series;
                        if (id == "thm13") {
                            series = thm_1_3_series(p, ball, alpha, beta, t_grid);
                        } else {
                            params.weight = [c, beta = beta](double t) {
                                return std::exp(-(c * beta + 1.0) * t);
                            };
                            series = thm_1_4_series(p, ball, params, t_grid);
                        }
                        all_ok = all_ok && series.max_violation <= config.tol_mono;
                        if (series.max_violation > report.max_violation)
                            report.max_violation = series.max_violation;
                        result.artifacts[prefix + "_" + id + "_" + tag + ".csv"] =
                            export_series_csv(series);
                    }
                }
                report.verdict = all_ok;
                report.notes.push_back("sweep of 6 admissible (alpha, beta) pairs, ball domain "
                                       "{b <= 1}");
            } else if (id == "thm15") {
                const double c = require_constant();
                auto outcome = thm_1_5_series(need_profile(), c, r_grid);
                report.verdict = outcome.series.verdict && outcome.eq31.verdict;
                report.max_violation =
                    std::max(outcome.series.max_violation, outcome.eq31.max_violation);
                report.witness = outcome.eq31.witness;
                report.tolerance_used = config.tol_mono;
                result.artifacts[prefix + "_thm15.csv"] = export_series_csv(outcome.series, "r");
                write_level_csv();
            } else if (id == "dirichlet") {
                report = dirichlet_identity_check(need_profile(), r_grid);
                write_level_csv();
            } else if (id == "remark31") {
                const double c = require_constant();
                report = remark_3_1_check(need_profile(), c, r_grid);
                write_level_csv();
            } else if (id == "gradient_estimate") {
                report = gradient_estimate_check(need_profile(), need_curvature(), r_grid);
            } else if (id == "lemma22") {
                report = lemma_2_2_check(need_profile(), audit_grid);
            } else if (id == "trace_identity") {
                report = trace_identity_check(need_profile(), audit_grid);
            } else {
                throw UnknownCheck("unknown check id '" + id + "'");
            }
        } catch (const Error& e) {
            report.verdict = false;
            report.notes.push_back(std::string("error: ") + e.what());
        }
        report.name = id;
        result.checks.push_back(std::move(report));
    }
    return result;
}

} // namespace detail

inline RunSummary run(const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    RunSummary summary;
    summary.config_echo = config.echo;

    std::vector<std::string> prefixes;
    for (std::size_t i = 0; i < config.manifolds.size(); ++i)
        prefixes.push_back("m" + std::to_string(i));

    if (config.jobs > 1 && config.manifolds.size() > 1) {
        std::vector<std::future<ManifoldRunResult>> futures;
        for (std::size_t i = 0; i < config.manifolds.size(); ++i)
            futures.push_back(std::async(std::launch::async, [&, i] {
                return detail::run_one(config.manifolds[i], config, prefixes[i]);
            }));
        for (auto& future : futures) summary.manifolds.push_back(future.get());
    } else {
        for (std::size_t i = 0; i < config.manifolds.size(); ++i)
            summary.manifolds.push_back(detail::run_one(config.manifolds[i], config, prefixes[i]));
    }

    for (const auto& manifold : summary.manifolds)
        for (const auto& check : manifold.checks)
            if (!check.verdict) summary.all_passed = false;

    summary.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    return summary;
}

inline nlohmann::ordered_json summary_json(const RunSummary& summary) {
    nlohmann::ordered_json root;
    root["tool"] = kToolName;
    root["version"] = kVersion;
    root["config"] = summary.config_echo;
    root["manifolds"] = nlohmann::ordered_json::array();
    for (const auto& manifold : summary.manifolds) {
        nlohmann::ordered_json node;
        node["label"] = manifold.label;
        node["validation"] = {{"origin_ok", manifold.validation.origin_ok},
                              {"positivity_ok", manifold.validation.positivity_ok},
                              {"derivative_consistency_ok",
                               manifold.validation.derivative_consistency_ok},
                              {"nonparabolic", manifold.validation.nonparabolic},
                              {"notes", manifold.validation.notes}};
        if (manifold.assumption) {
            nlohmann::ordered_json a;
            a["holds"] = manifold.assumption->holds;
            if (manifold.assumption->constant_c)
                a["constant_c"] = *manifold.assumption->constant_c;
            else
                a["constant_c"] = "unbounded";
            a["witness_r"] = manifold.assumption->witness_r;
            node["assumption"] = a;
        } else {
            node["assumption"] = nullptr;
        }
        node["checks"] = nlohmann::ordered_json::array();
        for (const auto& check : manifold.checks) {
            node["checks"].push_back({{"name", check.name},
                                      {"verdict", check.verdict},
                                      {"max_violation", check.max_violation},
                                      {"witness", check.witness},
                                      {"tolerance_used", check.tolerance_used},
                                      {"notes", check.notes}});
        }
        root["manifolds"].push_back(node);
    }
    root["all_passed"] = summary.all_passed;
    root["wall_time_ms"] = summary.wall_ms;
    return root;
}

namespace detail {

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write " + path.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

} // namespace detail

/// Writes the per-check artifacts and the summary into config.output_dir.
inline void write_artifacts(const RunSummary& summary, const RunConfig& config) {
    namespace fs = std::filesystem;
    const fs::path dir = config.output_dir;
    fs::create_directories(dir);
    const bool want_csv = config.format == "csv" || config.format == "both";
    const bool want_json = config.format == "json" || config.format == "both";
    if (want_csv)
        for (const auto& manifold : summary.manifolds)
            for (const auto& [name, content] : manifold.artifacts)
                detail::write_file_atomic(dir / name, content);
    if (want_json) detail::write_file_atomic(dir / "summary.json", summary_json(summary).dump(2));
}

inline std::string catalog_text() {
    std::ostringstream out;
    out << "catalog entries (addressable by \"type\" in config files):\n"
        << "  euclidean       {n >= 3}\n"
        << "  cone            {n, a > 0}            f(r) = a r\n"
        << "  perturbed_cone  {n, a, eps in [0,1), r0}  compactly supported C2 bump on "
           "[r0, 2 r0]\n"
        << "  sublinear       {n, 1/(n-1) < alpha < 1}  f(r) = r (1+r^2)^{(alpha-1)/2}\n"
        << "  custom          {n, alpha, coeff}     f(r) = coeff r^alpha\n";
    return out.str();
}

} // namespace greenlab
