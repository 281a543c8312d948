// fnolab command-line driver. Every subcommand writes a manifest next to its
// outputs; `fnolab replay --manifest <file>` re-executes a recorded run.

#include <CLI11.hpp>

#include <iostream>

#include "fnolab/cli.hpp"
#include "fnolab/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"operator-learning laboratory for the 1-D viscous Burgers equation"};
    app.set_version_flag("--version", fnolab::kVersion);
    app.set_config("--config", "", "flat key=value config file; flags override file values");
    app.require_subcommand(1);

    fnolab::cli::GenDataOptions gen;
    auto* cgen = app.add_subcommand("gen-data", "sample an H1-ball dataset through the solver");
    cgen->add_option("--n-train", gen.n_train, "training pairs")->capture_default_str();
    cgen->add_option("--n-test", gen.n_test, "held-out test pairs")->capture_default_str();
    cgen->add_option("--grid", gen.grid, "grid points")->capture_default_str();
    cgen->add_option("--nu", gen.nu, "viscosity")->capture_default_str();
    cgen->add_option("--radius", gen.radius, "H1-ball radius")->capture_default_str();
    cgen->add_option("--dt", gen.dt, "solver time step")->capture_default_str();
    cgen->add_option("--t-final", gen.t_final, "solution time")->capture_default_str();
    cgen->add_option("--k-max", gen.k_max, "highest excited wavenumber")->capture_default_str();
    cgen->add_option("--decay-p", gen.decay_p, "coefficient decay exponent")->capture_default_str();
    cgen->add_flag("--no-dealias{false}", gen.dealias, "disable the 2/3 rule");
    cgen->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
    cgen->add_option("--out", gen.out, "output dataset path")->capture_default_str();

    fnolab::cli::TrainOptions tr;
    auto* ctr = app.add_subcommand("train", "train one model on a dataset");
    ctr->add_option("--data", tr.data, "dataset file")->required();
    ctr->add_option("--modes", tr.modes, "retained Fourier modes")->capture_default_str();
    ctr->add_option("--width", tr.width, "channel width")->capture_default_str();
    ctr->add_option("--layers", tr.layers, "Fourier layers")->capture_default_str();
    ctr->add_option("--epochs", tr.epochs, "training epochs")->capture_default_str();
    ctr->add_option("--lr", tr.lr, "learning rate")->capture_default_str();
    ctr->add_option("--batch-size", tr.batch_size, "mini-batch size")->capture_default_str();
    ctr->add_option("--activation", tr.activation, "gelu or relu")->capture_default_str();
    ctr->add_option("--checkpoint-every", tr.checkpoint_every, "checkpoint cadence (0 = best/final only)")
        ->capture_default_str();
    ctr->add_option("--seed", tr.seed, "RNG seed")->capture_default_str();
    ctr->add_option("--out-dir", tr.out_dir, "output directory")->capture_default_str();

    fnolab::cli::SweepOptions sw;
    auto* csw = app.add_subcommand("sweep", "train a family of model sizes and fit the power law");
    csw->add_option("--data", sw.data, "dataset file");
    csw->add_option("--configs", sw.configs,
                    "model specs MODESxWIDTH (default: 8x32 12x48 16x64 24x96)");
    csw->add_option("--epochs", sw.epochs, "training epochs per run")->capture_default_str();
    csw->add_option("--lr", sw.lr, "learning rate")->capture_default_str();
    csw->add_option("--batch-size", sw.batch_size, "mini-batch size")->capture_default_str();
    csw->add_option("--activation", sw.activation, "gelu or relu")->capture_default_str();
    csw->add_option("--seed", sw.seed, "base RNG seed")->capture_default_str();
    csw->add_option("--out-dir", sw.out_dir, "output directory")->capture_default_str();
    csw->add_flag("--fit-only", sw.fit_only, "skip training; fit a points file");
    csw->add_option("--points", sw.points, "CSV of N,error rows for --fit-only");

    fnolab::cli::ExportFiguresOptions fig;
    auto* cfig = app.add_subcommand("export-figures", "emit plot-ready CSV data from a sweep");
    cfig->add_option("--sweep-dir", fig.sweep_dir, "directory written by `fnolab sweep`")
        ->required();
    cfig->add_option("--data", fig.data, "dataset file used by the sweep")->required();
    cfig->add_option("--extra-run", fig.extra_runs, "additional run dirs for the long-run figure");
    cfig->add_option("--out-dir", fig.out_dir, "output directory")->capture_default_str();

    std::string manifest_path;
    auto* crep = app.add_subcommand("replay", "re-execute a run from its manifest");
    crep->add_option("--manifest", manifest_path, "manifest JSON written by a previous run")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cgen->parsed()) return fnolab::cli::cmd_gen_data(gen);
        if (ctr->parsed()) return fnolab::cli::cmd_train(tr);
        if (csw->parsed()) return fnolab::cli::cmd_sweep(sw);
        if (cfig->parsed()) return fnolab::cli::cmd_export_figures(fig);
        if (crep->parsed()) return fnolab::cli::cmd_replay(manifest_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
