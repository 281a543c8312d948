#pragma once

// Dataset construction: random smooth initial conditions from a bounded
// H1-ball, pushed through the Burgers solver to t_final, with keyed RNG
// streams so any sample is reproducible independently of generation order.

#include <string>
#include <vector>

#include <json.hpp>

#include "fnolab/burgers.hpp"
#include "fnolab/io.hpp"
#include "fnolab/rng.hpp"
#include "fnolab/spectral.hpp"

namespace fnolab {

struct SamplerConfig {
    double radius = 0.3;   // H1-ball bound
    int k_max = 8;         // highest excited wavenumber
    double decay_p = 2.0;  // coefficient std ~ k^{-p}
    bool zero_mean = true;
    std::uint64_t seed = 0;

    void validate(int grid_n) const {
        if (!(radius > 0.0)) throw Error("SamplerConfig: radius must be positive");
        if (k_max < 1) throw Error("SamplerConfig: k_max must be >= 1");
        if (k_max > grid_n / 3)
            throw Error("SamplerConfig: k_max must stay at or below n/3 (dealias headroom)");
        if (!(decay_p > 0.0)) throw Error("SamplerConfig: decay_p must be positive");
    }
};

inline void to_json(nlohmann::json& j, const SamplerConfig& c) {
    j = {{"radius", c.radius},
         {"k_max", c.k_max},
         {"decay_p", c.decay_p},
         {"zero_mean", c.zero_mean},
         {"seed", c.seed}};
}
inline void from_json(const nlohmann::json& j, SamplerConfig& c) {
    j.at("radius").get_to(c.radius);
    j.at("k_max").get_to(c.k_max);
    j.at("decay_p").get_to(c.decay_p);
    j.at("zero_mean").get_to(c.zero_mean);
    j.at("seed").get_to(c.seed);
}

inline void to_json(nlohmann::json& j, const SolverConfig& c) {
    j = {{"nu", c.nu},
         {"t_final", c.t_final},
         {"dt", c.dt},
         {"dealias", c.dealias},
         {"n", c.n}};
}
inline void from_json(const nlohmann::json& j, SolverConfig& c) {
    j.at("nu").get_to(c.nu);
    j.at("t_final").get_to(c.t_final);
    j.at("dt").get_to(c.dt);
    j.at("dealias").get_to(c.dealias);
    j.at("n").get_to(c.n);
}

enum class Split { train, test };

inline const char* split_name(Split s) { return s == Split::train ? "train" : "test"; }

// f = sum_{k=1..k_max} a_k cos(2pi kx) + b_k sin(2pi kx), a_k, b_k ~ N(0, k^{-2p}),
// rescaled so ||f||_H1 = r * R with r ~ U[0.5, 1]. The H1 norm is computed
// from the coefficients ( ||cos_k||_L2^2 = 1/2 ), which the grid reproduces
// exactly below Nyquist.
inline RealField sample_initial_condition(const SamplerConfig& cfg, PeriodicGrid grid, Split split,
                                          std::uint64_t draw_index) {
    cfg.validate(grid.n);
    for (std::uint64_t salt = 0;; ++salt) {
        KeyedRng rng(cfg.seed, split == Split::train ? "sample-train" : "sample-test",
                     hash_combine(draw_index, salt));
        std::vector<double> ak(cfg.k_max + 1, 0.0), bk(cfg.k_max + 1, 0.0);
        double a0 = 0.0;
        double h1_sq = 0.0;
        if (!cfg.zero_mean) {
            a0 = rng.normal();
            h1_sq += a0 * a0;
        }
        for (int k = 1; k <= cfg.k_max; ++k) {
            const double sigma = std::pow(static_cast<double>(k), -cfg.decay_p);
            ak[k] = sigma * rng.normal();
            bk[k] = sigma * rng.normal();
            h1_sq += 0.5 * (1.0 + std::pow(kTwoPi * k, 2)) * (ak[k] * ak[k] + bk[k] * bk[k]);
        }
        const double norm = std::sqrt(h1_sq);
        if (norm == 0.0) continue; // probability-zero degenerate draw
        const double r = rng.uniform(0.5, 1.0);
        const double scale = r * cfg.radius / norm;
        RealField f(grid);
        for (int i = 0; i < grid.n; ++i) f[i] = scale * a0;
        for (int k = 1; k <= cfg.k_max; ++k) {
            const double a = scale * ak[k], b = scale * bk[k];
            for (int i = 0; i < grid.n; ++i) {
                const double x = grid.point(i);
                f[i] += a * std::cos(kTwoPi * k * x) + b * std::sin(kTwoPi * k * x);
            }
        }
        return f;
    }
}

struct SamplePair {
    RealField u0;
    RealField uT;
    double u0_h1 = 0.0;
};

struct Dataset {
    PeriodicGrid grid{4};
    SamplerConfig sampler;
    SolverConfig solver;
    std::vector<SamplePair> train;
    std::vector<SamplePair> test;

    friend bool operator==(const Dataset& a, const Dataset& b) {
        auto pairs_equal = [](const std::vector<SamplePair>& x, const std::vector<SamplePair>& y) {
            if (x.size() != y.size()) return false;
            for (std::size_t i = 0; i < x.size(); ++i)
                if (!(x[i].u0 == y[i].u0) || !(x[i].uT == y[i].uT) || x[i].u0_h1 != y[i].u0_h1)
                    return false;
            return true;
        };
        return a.grid == b.grid && pairs_equal(a.train, b.train) && pairs_equal(a.test, b.test);
    }
};

inline Dataset build_dataset(const SamplerConfig& sampler, const SolverConfig& solver, int n_train,
                             int n_test) {
    solver.validate();
    sampler.validate(solver.n);
    if (n_train < 0 || n_test < 0) throw Error("build_dataset: negative split size");
    Dataset d;
    d.grid = PeriodicGrid(solver.n);
    d.sampler = sampler;
    d.solver = solver;
    auto make = [&](Split split, int count, std::vector<SamplePair>& out) {
        out.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            RealField u0 =
                sample_initial_condition(sampler, d.grid, split, static_cast<std::uint64_t>(i));
            RealField uT(d.grid);
            try {
                uT = solve(u0, solver);
            } catch (const Error& e) {
                throw Error("build_dataset: solver failed on " + std::string(split_name(split)) +
                            " sample " + std::to_string(i) + ": " + e.what());
            }
            const double h1 = hs_norm(u0, 1.0);
            out.push_back({std::move(u0), std::move(uT), h1});
        }
    };
    make(Split::train, n_train, d.train);
    make(Split::test, n_test, d.test);
    return d;
}

namespace detail {

inline void flatten_split(const std::vector<SamplePair>& split, int n, io::Array& u0s,
                          io::Array& uts, io::Array& h1s) {
    const auto count = static_cast<std::int64_t>(split.size());
    u0s.shape = {count, n};
    uts.shape = {count, n};
    h1s.shape = {count};
    u0s.data.reserve(split.size() * static_cast<std::size_t>(n));
    uts.data.reserve(split.size() * static_cast<std::size_t>(n));
    for (const auto& p : split) {
        u0s.data.insert(u0s.data.end(), p.u0.values.begin(), p.u0.values.end());
        uts.data.insert(uts.data.end(), p.uT.values.begin(), p.uT.values.end());
        h1s.data.push_back(p.u0_h1);
    }
}

inline std::vector<SamplePair> unflatten_split(PeriodicGrid g, const io::Array& u0s,
                                               const io::Array& uts, const io::Array& h1s) {
    if (u0s.shape.size() != 2 || u0s.shape[1] != g.n)
        throw io::MalformedFile("dataset: bad u0 array shape");
    const auto count = static_cast<std::size_t>(u0s.shape[0]);
    std::vector<SamplePair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        RealField u0(g), uT(g);
        const auto off = i * static_cast<std::size_t>(g.n);
        std::copy_n(u0s.data.begin() + off, g.n, u0.values.begin());
        std::copy_n(uts.data.begin() + off, g.n, uT.values.begin());
        out.push_back({std::move(u0), std::move(uT), h1s.data[i]});
    }
    return out;
}

} // namespace detail

inline void save_dataset(const Dataset& d, const std::string& path) {
    nlohmann::json meta;
    meta["grid_n"] = d.grid.n;
    meta["sampler"] = d.sampler;
    meta["solver"] = d.solver;
    meta["n_train"] = d.train.size();
    meta["n_test"] = d.test.size();

    std::vector<io::Array> arrays(6);
    arrays[0].name = "train_u0";
    arrays[1].name = "train_uT";
    arrays[2].name = "train_u0_h1";
    arrays[3].name = "test_u0";
    arrays[4].name = "test_uT";
    arrays[5].name = "test_u0_h1";
    detail::flatten_split(d.train, d.grid.n, arrays[0], arrays[1], arrays[2]);
    detail::flatten_split(d.test, d.grid.n, arrays[3], arrays[4], arrays[5]);
    io::write_container(path, "dataset", meta, arrays);
}

inline Dataset load_dataset(const std::string& path) {
    const io::Container c = io::read_container(path, "dataset");
    Dataset d;
    d.grid = PeriodicGrid(c.meta.at("grid_n").get<int>());
    d.sampler = c.meta.at("sampler").get<SamplerConfig>();
    d.solver = c.meta.at("solver").get<SolverConfig>();
    d.train = detail::unflatten_split(d.grid, c.find("train_u0"), c.find("train_uT"),
                                      c.find("train_u0_h1"));
    d.test =
        detail::unflatten_split(d.grid, c.find("test_u0"), c.find("test_uT"), c.find("test_u0_h1"));
    return d;
}

} // namespace fnolab
