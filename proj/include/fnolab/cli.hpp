#pragma once

// Command implementations behind the fnolab binary: dataset generation,
// training, sweeps, power-law fitting and figure-data export. Every command
// resolves its options up front, writes a manifest listing inputs and outputs
// with checksums, and is byte-reproducible given identical flags and inputs.
// Relative output paths are resolved under $FNOLAB_OUT_ROOT when that is set.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fnolab/manifest.hpp"
#include "fnolab/scaling.hpp"

namespace fnolab::cli {

inline std::string resolve_out(const std::string& path) {
    if (path.empty()) return path;
    const std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    if (const char* root = std::getenv("FNOLAB_OUT_ROOT"); root && *root)
        return (std::filesystem::path(root) / p).string();
    return path;
}

// ---------------------------------------------------------------- gen-data

struct GenDataOptions {
    int n_train = 256;
    int n_test = 64;
    int grid = 256;
    double nu = 0.01;
    double radius = 0.3;
    double dt = 1e-3;
    double t_final = 1.0;
    int k_max = 8;
    double decay_p = 2.0;
    bool dealias = true;
    std::uint64_t seed = 0;
    std::string out = "dataset.bin";
};

inline void to_json(nlohmann::json& j, const GenDataOptions& o) {
    j = {{"n_train", o.n_train}, {"n_test", o.n_test},   {"grid", o.grid},
         {"nu", o.nu},           {"radius", o.radius},   {"dt", o.dt},
         {"t_final", o.t_final}, {"k_max", o.k_max},     {"decay_p", o.decay_p},
         {"dealias", o.dealias}, {"seed", o.seed},       {"out", o.out}};
}
inline void from_json(const nlohmann::json& j, GenDataOptions& o) {
    j.at("n_train").get_to(o.n_train);
    j.at("n_test").get_to(o.n_test);
    j.at("grid").get_to(o.grid);
    j.at("nu").get_to(o.nu);
    j.at("radius").get_to(o.radius);
    j.at("dt").get_to(o.dt);
    j.at("t_final").get_to(o.t_final);
    j.at("k_max").get_to(o.k_max);
    j.at("decay_p").get_to(o.decay_p);
    j.at("dealias").get_to(o.dealias);
    j.at("seed").get_to(o.seed);
    j.at("out").get_to(o.out);
}

inline int cmd_gen_data(const GenDataOptions& opt) {
    SamplerConfig sampler;
    sampler.radius = opt.radius;
    sampler.k_max = opt.k_max;
    sampler.decay_p = opt.decay_p;
    sampler.seed = opt.seed;
    SolverConfig solver;
    solver.nu = opt.nu;
    solver.dt = opt.dt;
    solver.t_final = opt.t_final;
    solver.dealias = opt.dealias;
    solver.n = opt.grid;

    const Dataset d = build_dataset(sampler, solver, opt.n_train, opt.n_test);
    const std::string out = resolve_out(opt.out);
    save_dataset(d, out);

    RunManifest m;
    m.command = "gen-data";
    m.options = opt;
    m.add_output(out);
    write_manifest(out + ".manifest.json", m);
    std::cout << "wrote " << out << " (" << d.train.size() << " train / " << d.test.size()
              << " test pairs)\n";
    return 0;
}

// ------------------------------------------------------------------- train

struct TrainOptions {
    std::string data;
    int modes = 8;
    int width = 32;
    int layers = 4;
    int epochs = 100;
    double lr = 1e-3;
    int batch_size = 16;
    std::string activation = "gelu";
    int checkpoint_every = 0;
    std::uint64_t seed = 0;
    std::string out_dir = "run";
};

inline void to_json(nlohmann::json& j, const TrainOptions& o) {
    j = {{"data", o.data},       {"modes", o.modes},
         {"width", o.width},     {"layers", o.layers},
         {"epochs", o.epochs},   {"lr", o.lr},
         {"batch_size", o.batch_size}, {"activation", o.activation},
         {"checkpoint_every", o.checkpoint_every}, {"seed", o.seed},
         {"out_dir", o.out_dir}};
}
inline void from_json(const nlohmann::json& j, TrainOptions& o) {
    j.at("data").get_to(o.data);
    j.at("modes").get_to(o.modes);
    j.at("width").get_to(o.width);
    j.at("layers").get_to(o.layers);
    j.at("epochs").get_to(o.epochs);
    j.at("lr").get_to(o.lr);
    j.at("batch_size").get_to(o.batch_size);
    j.at("activation").get_to(o.activation);
    j.at("checkpoint_every").get_to(o.checkpoint_every);
    j.at("seed").get_to(o.seed);
    j.at("out_dir").get_to(o.out_dir);
}

inline int cmd_train(const TrainOptions& opt) {
    if (opt.data.empty()) throw Error("train: --data is required");
    const Dataset data = load_dataset(opt.data);

    FnoConfig fno;
    fno.modes = opt.modes;
    fno.width = opt.width;
    fno.layers = opt.layers;
    fno.activation = activation_from_name(opt.activation);
    if (fno.modes > data.grid.n / 2)
        throw Error("train: --modes " + std::to_string(opt.modes) +
                    " exceeds the dataset grid Nyquist wavenumber " +
                    std::to_string(data.grid.n / 2));
    TrainConfig cfg;
    cfg.epochs = opt.epochs;
    cfg.lr = opt.lr;
    cfg.batch_size = opt.batch_size;
    cfg.checkpoint_every = opt.checkpoint_every;
    cfg.seed = opt.seed;

    const std::string out_dir = resolve_out(opt.out_dir);
    const TrainResult r = train(data, fno, cfg, out_dir);
    save_curve_csv(r.curve, out_dir + "/curve.csv");

    RunManifest m;
    m.command = "train";
    m.options = opt;
    m.add_input(opt.data);
    m.add_output(out_dir + "/curve.csv");
    m.add_output(out_dir + "/best.fno");
    m.add_output(out_dir + "/final.fno");
    write_manifest(out_dir + "/manifest.json", m);

    if (r.curve.aborted) {
        std::cout << "training aborted: " << r.curve.abort_reason << "\n";
        return 1;
    }
    std::cout << "trained (m=" << opt.modes << ", w=" << opt.width << "): best test loss "
              << io::fmt_double(r.curve.best_test_loss) << " at epoch " << r.curve.best_epoch
              << ", final " << io::fmt_double(r.curve.records.back().test_loss) << "\n";
    return 0;
}

// ------------------------------------------------------------------- sweep

struct SweepOptions {
    std::string data;
    std::vector<std::string> configs; // "8x32" style; empty = default four
    int epochs = 100;
    double lr = 1e-3;
    int batch_size = 16;
    std::string activation = "gelu";
    std::uint64_t seed = 0;
    std::string out_dir = "sweep";
    bool fit_only = false;
    std::string points; // CSV of N,error for --fit-only
};

inline void to_json(nlohmann::json& j, const SweepOptions& o) {
    j = {{"data", o.data},     {"configs", o.configs},     {"epochs", o.epochs},
         {"lr", o.lr},         {"batch_size", o.batch_size}, {"activation", o.activation},
         {"seed", o.seed},     {"out_dir", o.out_dir},     {"fit_only", o.fit_only},
         {"points", o.points}};
}
inline void from_json(const nlohmann::json& j, SweepOptions& o) {
    j.at("data").get_to(o.data);
    j.at("configs").get_to(o.configs);
    j.at("epochs").get_to(o.epochs);
    j.at("lr").get_to(o.lr);
    j.at("batch_size").get_to(o.batch_size);
    j.at("activation").get_to(o.activation);
    j.at("seed").get_to(o.seed);
    j.at("out_dir").get_to(o.out_dir);
    j.at("fit_only").get_to(o.fit_only);
    j.at("points").get_to(o.points);
}

inline FnoConfig parse_config_spec(const std::string& spec, const std::string& activation) {
    const auto x = spec.find('x');
    if (x == std::string::npos || x == 0 || x + 1 >= spec.size())
        throw Error("sweep: bad config spec '" + spec + "' (expected MODESxWIDTH, e.g. 8x32)");
    FnoConfig c;
    try {
        c.modes = std::stoi(spec.substr(0, x));
        c.width = std::stoi(spec.substr(x + 1));
    } catch (const std::exception&) {
        throw Error("sweep: bad config spec '" + spec + "'");
    }
    c.activation = activation_from_name(activation);
    return c;
}

inline std::vector<std::pair<double, double>> load_points_csv(const std::string& path) {
    std::istringstream in(io::read_text_file(path));
    std::vector<std::pair<double, double>> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("N,", 0) == 0) continue;
        std::istringstream ls(line);
        double N, e;
        char c;
        ls >> N >> c >> e;
        if (!ls) throw io::MalformedFile(path + ": bad points row '" + line + "'");
        pts.emplace_back(N, e);
    }
    return pts;
}

inline int cmd_sweep(const SweepOptions& opt) {
    const std::string out_dir = resolve_out(opt.out_dir);
    RunManifest m;
    m.command = "sweep";
    m.options = opt;

    if (opt.fit_only) {
        if (opt.points.empty()) throw Error("sweep --fit-only: --points file is required");
        const auto pts = load_points_csv(opt.points);
        const PowerLawFit fit = fit_power_law(pts);
        nlohmann::json j;
        j["points_file"] = opt.points;
        j["fit"] = fit;
        io::write_text_file(out_dir + "/fit.json", j.dump(2) + "\n");
        m.add_input(opt.points);
        m.add_output(out_dir + "/fit.json");
        write_manifest(out_dir + "/manifest.json", m);
        std::cout << "fit: alpha = " << io::fmt_double(fit.alpha)
                  << ", C = " << io::fmt_double(fit.C)
                  << ", r^2 = " << io::fmt_double(fit.r_squared) << "\n";
        return 0;
    }

    if (opt.data.empty()) throw Error("sweep: --data is required");
    const Dataset data = load_dataset(opt.data);
    std::vector<FnoConfig> configs;
    if (opt.configs.empty()) {
        configs = default_sweep_configs();
        for (auto& c : configs) c.activation = activation_from_name(opt.activation);
    } else {
        for (const auto& s : opt.configs) configs.push_back(parse_config_spec(s, opt.activation));
    }
    TrainConfig cfg;
    cfg.epochs = opt.epochs;
    cfg.lr = opt.lr;
    cfg.batch_size = opt.batch_size;
    cfg.seed = opt.seed;

    const std::vector<SweepRecord> records = run_sweep(data, configs, cfg, out_dir);
    nlohmann::json jrec = nlohmann::json::array();
    for (const auto& r : records) jrec.push_back(r);
    io::write_text_file(out_dir + "/sweep_records.json", jrec.dump(2) + "\n");
    m.add_input(opt.data);
    m.add_output(out_dir + "/sweep_records.json");

    for (const ErrorSeries which : {ErrorSeries::best, ErrorSeries::final}) {
        const ScalingReport rep = scaling_report(records, which);
        const std::string stem = out_dir + "/report_" + series_name(which);
        io::write_text_file(stem + ".json", scaling_report_json(rep).dump(2) + "\n");
        io::write_text_file(stem + ".csv", scaling_report_csv(rep));
        m.add_output(stem + ".json");
        m.add_output(stem + ".csv");
        std::cout << series_name(which) << "-epoch fit: alpha = " << io::fmt_double(rep.fit.alpha)
                  << ", C = " << io::fmt_double(rep.fit.C)
                  << (rep.u_shape_flag ? " [u-shape flag set]" : "") << "\n";
    }
    write_manifest(out_dir + "/manifest.json", m);
    return 0;
}

// --------------------------------------------------------------- figures

struct ExportFiguresOptions {
    std::string sweep_dir;
    std::string data;
    std::vector<std::string> extra_runs; // additional run dirs for fig3
    std::string out_dir = "figures";
};

inline void to_json(nlohmann::json& j, const ExportFiguresOptions& o) {
    j = {{"sweep_dir", o.sweep_dir},
         {"data", o.data},
         {"extra_runs", o.extra_runs},
         {"out_dir", o.out_dir}};
}
inline void from_json(const nlohmann::json& j, ExportFiguresOptions& o) {
    j.at("sweep_dir").get_to(o.sweep_dir);
    j.at("data").get_to(o.data);
    j.at("extra_runs").get_to(o.extra_runs);
    j.at("out_dir").get_to(o.out_dir);
}

inline int cmd_export_figures(const ExportFiguresOptions& opt) {
    if (opt.sweep_dir.empty())
        throw Error("export-figures: --sweep-dir is required (run `fnolab sweep` first)");
    if (opt.data.empty())
        throw Error("export-figures: --data is required (the dataset used by the sweep)");
    const std::string records_path = opt.sweep_dir + "/sweep_records.json";
    if (!std::filesystem::exists(records_path))
        throw Error("export-figures: missing " + records_path + " (produced by `fnolab sweep`)");

    std::vector<SweepRecord> records;
    for (const auto& j : nlohmann::json::parse(io::read_text_file(records_path)))
        records.push_back(j.get<SweepRecord>());
    const Dataset data = load_dataset(opt.data);
    const std::string out_dir = resolve_out(opt.out_dir);

    RunManifest m;
    m.command = "export-figures";
    m.options = opt;
    m.add_input(records_path);
    m.add_input(opt.data);

    // fig 1: qualitative sample under the best available model
    {
        const SweepRecord* pick = nullptr;
        for (const auto& r : records)
            if (!r.aborted && !r.run_dir.empty() && (!pick || r.best_test_loss < pick->best_test_loss))
                pick = &r;
        if (!pick)
            throw Error("export-figures: no usable run with checkpoints in " + records_path);
        const FnoParams params = load_checkpoint(pick->run_dir + "/best.fno");
        if (data.test.empty()) throw Error("export-figures: dataset has no test samples");
        export_qualitative(params, data.test.front(), out_dir + "/fig1_qualitative.csv");
        m.add_output(out_dir + "/fig1_qualitative.csv");
    }

    // fig 2: per-size learning curves in long format
    {
        std::ostringstream os;
        os << "modes,width,n_params,epoch,test_loss\n";
        for (const auto& r : records) {
            if (r.run_dir.empty()) continue;
            const LearningCurve c = load_curve_csv(r.run_dir + "/curve.csv");
            for (const auto& rec : c.records)
                os << r.config.modes << ',' << r.config.width << ',' << r.n_params << ','
                   << rec.epoch << ',' << io::fmt_double(rec.test_loss) << '\n';
        }
        io::write_text_file(out_dir + "/fig2_learning_curves.csv", os.str());
        m.add_output(out_dir + "/fig2_learning_curves.csv");
    }

    // fig 3: long-horizon behavior of the largest model (plus any extra runs)
    {
        const SweepRecord* largest = nullptr;
        for (const auto& r : records)
            if (!r.run_dir.empty() && (!largest || r.n_params > largest->n_params)) largest = &r;
        std::ostringstream os;
        os << "run,epoch,test_loss,flag\n";
        auto append_run = [&os](const std::string& label, const std::string& dir) {
            const LearningCurve c = load_curve_csv(dir + "/curve.csv");
            for (const auto& rec : c.records)
                os << label << ',' << rec.epoch << ',' << io::fmt_double(rec.test_loss) << ','
                   << (rec.instability_flag ? 1 : 0) << '\n';
        };
        if (largest)
            append_run("sweep_m" + std::to_string(largest->config.modes) + "_w" +
                           std::to_string(largest->config.width),
                       largest->run_dir);
        for (const auto& dir : opt.extra_runs)
            append_run(std::filesystem::path(dir).filename().string(), dir);
        io::write_text_file(out_dir + "/fig3_longrun_curves.csv", os.str());
        m.add_output(out_dir + "/fig3_longrun_curves.csv");
    }

    // fig 4: error vs N with fitted and benchmark lines, both series
    {
        nlohmann::json fits;
        for (const ErrorSeries which : {ErrorSeries::best, ErrorSeries::final}) {
            const ScalingReport rep = scaling_report(records, which);
            const std::string path =
                out_dir + "/fig4_scaling_" + series_name(which) + ".csv";
            io::write_text_file(path, scaling_report_csv(rep));
            m.add_output(path);
            fits[series_name(which)] = scaling_report_json(rep);
        }
        io::write_text_file(out_dir + "/fig4_fit.json", fits.dump(2) + "\n");
        m.add_output(out_dir + "/fig4_fit.json");
    }

    write_manifest(out_dir + "/manifest.json", m);
    std::cout << "figure data written to " << out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------- replay

inline int cmd_replay(const std::string& manifest_path) {
    const RunManifest m = read_manifest(manifest_path);
    if (m.command == "gen-data") return cmd_gen_data(m.options.get<GenDataOptions>());
    if (m.command == "train") return cmd_train(m.options.get<TrainOptions>());
    if (m.command == "sweep") return cmd_sweep(m.options.get<SweepOptions>());
    if (m.command == "export-figures")
        return cmd_export_figures(m.options.get<ExportFiguresOptions>());
    throw Error("replay: unknown command '" + m.command + "' in " + manifest_path);
}

} // namespace fnolab::cli
