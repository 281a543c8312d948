#pragma once

// Model-size sweep and power-law analysis: fits error ~ C * N^(-alpha) by
// ordinary least squares in log-log space and compares the fitted exponent
// against the theoretical benchmark s/d.

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fnolab/train.hpp"

namespace fnolab {

struct SweepRecord {
    FnoConfig config;
    std::int64_t n_params = 0;
    double final_test_loss = 0.0;
    double best_test_loss = 0.0;
    int best_epoch = 0;
    double rel_h1 = 0.0; // at the best checkpoint
    bool aborted = false;
    std::string abort_reason;
    std::string run_dir;
};

inline void to_json(nlohmann::json& j, const SweepRecord& r) {
    j = {{"config", r.config},
         {"n_params", r.n_params},
         {"final_test_loss", r.final_test_loss},
         {"best_test_loss", r.best_test_loss},
         {"best_epoch", r.best_epoch},
         {"rel_h1", r.rel_h1},
         {"aborted", r.aborted},
         {"abort_reason", r.abort_reason},
         {"run_dir", r.run_dir}};
}
inline void from_json(const nlohmann::json& j, SweepRecord& r) {
    j.at("config").get_to(r.config);
    j.at("n_params").get_to(r.n_params);
    j.at("final_test_loss").get_to(r.final_test_loss);
    j.at("best_test_loss").get_to(r.best_test_loss);
    j.at("best_epoch").get_to(r.best_epoch);
    j.at("rel_h1").get_to(r.rel_h1);
    j.at("aborted").get_to(r.aborted);
    r.abort_reason = j.value("abort_reason", "");
    r.run_dir = j.value("run_dir", "");
}

inline std::vector<FnoConfig> default_sweep_configs() {
    std::vector<FnoConfig> out;
    for (const auto& [m, w] : {std::pair{8, 32}, {12, 48}, {16, 64}, {24, 96}}) {
        FnoConfig c;
        c.modes = m;
        c.width = w;
        out.push_back(c);
    }
    return out;
}

// One training run per config. Each run draws its own seed from the base
// seed and the config index, so sweeps are reproducible as a whole and
// runs stay independent.
inline std::vector<SweepRecord> run_sweep(const Dataset& data, std::span<const FnoConfig> configs,
                                          const TrainConfig& base_cfg,
                                          const std::string& out_dir = "") {
    if (configs.empty()) throw Error("run_sweep: need at least one config");
    std::vector<SweepRecord> records;
    records.reserve(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        SweepRecord rec;
        rec.config = configs[i];
        rec.n_params = param_count(configs[i]);
        TrainConfig cfg = base_cfg;
        cfg.seed = hash_combine(base_cfg.seed, hash_combine(stream_tag("sweep-run"), i));
        std::string run_dir;
        if (!out_dir.empty()) {
            run_dir = out_dir + "/run_m" + std::to_string(configs[i].modes) + "_w" +
                      std::to_string(configs[i].width);
            rec.run_dir = run_dir;
        }
        try {
            const TrainResult r = train(data, configs[i], cfg, run_dir);
            if (r.curve.aborted || r.curve.records.empty()) {
                rec.aborted = true;
                rec.abort_reason = r.curve.abort_reason.empty() ? "no completed epochs"
                                                                : r.curve.abort_reason;
            } else {
                rec.final_test_loss = r.curve.records.back().test_loss;
                rec.best_test_loss = r.curve.best_test_loss;
                rec.best_epoch = r.curve.best_epoch;
                rec.rel_h1 = evaluate(r.best_params, data.test).rel_h1;
            }
            if (!run_dir.empty()) save_curve_csv(r.curve, run_dir + "/curve.csv");
        } catch (const Error& e) {
            rec.aborted = true;
            rec.abort_reason = e.what();
        }
        records.push_back(std::move(rec));
    }
    return records;
}

struct PowerLawFit {
    double C = 0.0;
    double alpha = 0.0;
    double r_squared = 0.0;
    int points_used = 0;
};

inline void to_json(nlohmann::json& j, const PowerLawFit& f) {
    j = {{"C", f.C}, {"alpha", f.alpha}, {"r_squared", f.r_squared}, {"points_used", f.points_used}};
}

// OLS on (ln N, ln error): alpha = -slope, C = exp(intercept).
inline PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) throw Error("fit_power_law: need >= 2 points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].first > 0.0)) throw Error("fit_power_law: N must be positive");
        if (!(points[i].second > 0.0)) throw Error("fit_power_law: errors must be positive");
        for (std::size_t k = 0; k < i; ++k)
            if (points[k].first == points[i].first)
                throw Error("fit_power_law: duplicate N value");
    }
    const auto n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [N, e] : points) {
        mx += std::log(N);
        my += std::log(e);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [N, e] : points) {
        const double dx = std::log(N) - mx, dy = std::log(e) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    PowerLawFit fit;
    fit.alpha = -slope;
    fit.C = std::exp(intercept);
    fit.points_used = static_cast<int>(points.size());
    if (syy == 0.0) {
        fit.r_squared = 1.0; // flat data, fit is exact
    } else {
        double ss_res = 0.0;
        for (const auto& [N, e] : points) {
            const double r = std::log(e) - (intercept + slope * std::log(N));
            ss_res += r * r;
        }
        fit.r_squared = 1.0 - ss_res / syy;
    }
    return fit;
}

// Theoretical benchmark exponent s/d; the underlying bound assumes s > d/2.
inline double benchmark_exponent(double s, int d) {
    if (d < 1) throw Error("benchmark_exponent: dimension d must be >= 1");
    if (!(s > static_cast<double>(d) / 2.0))
        throw Error("benchmark_exponent: requires s > d/2 (bound hypothesis violated)");
    return s / static_cast<double>(d);
}

enum class ErrorSeries { best, final };

inline const char* series_name(ErrorSeries s) { return s == ErrorSeries::best ? "best" : "final"; }

struct ScalingReport {
    ErrorSeries which = ErrorSeries::best;
    std::vector<std::pair<double, double>> points; // (N, error), sorted by N
    PowerLawFit fit;
    double benchmark = 1.0;       // s/d
    double benchmark_anchor = 0.0; // C for the benchmark line through the first point
    bool u_shape_flag = false;
    std::vector<std::string> excluded; // aborted runs left out of the fit
    std::vector<std::string> notes;
};

// Emits the log-log points, the fitted law, the benchmark line anchored at
// the smallest model, and a U-shape diagnostic comparing the endpoint errors.
inline ScalingReport scaling_report(std::span<const SweepRecord> records, ErrorSeries which,
                                    double s = 1.0, int d = 1) {
    ScalingReport rep;
    rep.which = which;
    rep.benchmark = benchmark_exponent(s, d);
    for (const auto& r : records) {
        if (r.aborted) {
            rep.excluded.push_back("m" + std::to_string(r.config.modes) + "_w" +
                                   std::to_string(r.config.width) + ": " + r.abort_reason);
            continue;
        }
        const double err = which == ErrorSeries::best ? r.best_test_loss : r.final_test_loss;
        rep.points.emplace_back(static_cast<double>(r.n_params), err);
    }
    if (rep.points.size() < 2)
        throw Error("scaling_report: need >= 2 usable records (have " +
                    std::to_string(rep.points.size()) + ")");
    std::sort(rep.points.begin(), rep.points.end());
    rep.fit = fit_power_law(rep.points);
    rep.benchmark_anchor =
        rep.points.front().second * std::pow(rep.points.front().first, rep.benchmark);
    rep.u_shape_flag = rep.points.back().second > rep.points.front().second;
    if (rep.u_shape_flag)
        rep.notes.push_back("largest model ends worse than the smallest: the " +
                            std::string(series_name(which)) +
                            "-error series is dominated by optimization behavior, not "
                            "approximation capacity");
    if (!rep.excluded.empty())
        rep.notes.push_back(std::to_string(rep.excluded.size()) +
                            " aborted run(s) excluded from the fit");
    rep.notes.push_back("fitted exponents depend strongly on whether best-epoch or final-epoch "
                        "errors are used; compare both reports before quoting a rate");
    return rep;
}

inline nlohmann::json scaling_report_json(const ScalingReport& rep) {
    nlohmann::json j;
    j["series"] = series_name(rep.which);
    j["points"] = nlohmann::json::array();
    for (const auto& [N, e] : rep.points) j["points"].push_back({{"N", N}, {"error", e}});
    j["fit"] = rep.fit;
    j["benchmark_exponent"] = rep.benchmark;
    j["benchmark_anchor"] = rep.benchmark_anchor;
    j["u_shape_flag"] = rep.u_shape_flag;
    j["excluded"] = rep.excluded;
    j["notes"] = rep.notes;
    return j;
}

// CSV with one row per model: the data point, the fitted line and the
// benchmark line at that N (ready for a log-log plot).
inline std::string scaling_report_csv(const ScalingReport& rep) {
    std::ostringstream os;
    os << "N,error,fit,benchmark\n";
    for (const auto& [N, e] : rep.points) {
        const double fitline = rep.fit.C * std::pow(N, -rep.fit.alpha);
        const double benchline = rep.benchmark_anchor * std::pow(N, -rep.benchmark);
        os << io::fmt_double(N) << ',' << io::fmt_double(e) << ',' << io::fmt_double(fitline)
           << ',' << io::fmt_double(benchline) << '\n';
    }
    return os.str();
}

} // namespace fnolab
