#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "fnolab/cli.hpp"

using namespace fnolab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / "fnolab_cli_test" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

cli::GenDataOptions small_gen(const std::string& out) {
    cli::GenDataOptions o;
    o.n_train = 6;
    o.n_test = 3;
    o.grid = 64;
    o.dt = 5e-3;
    o.seed = 42;
    o.out = out;
    return o;
}

} // namespace

TEST_CASE("gen-data writes a valid dataset, manifest and is byte-reproducible") {
    const auto dir = fresh_dir("gen");
    const auto p1 = (dir / "d1.bin").string();
    const auto p2 = (dir / "d2.bin").string();
    CHECK(cli::cmd_gen_data(small_gen(p1)) == 0);
    CHECK(cli::cmd_gen_data(small_gen(p2)) == 0);
    CHECK(io::read_text_file(p1) == io::read_text_file(p2));

    const Dataset d = load_dataset(p1);
    CHECK(d.train.size() == 6);
    CHECK(d.test.size() == 3);
    for (const auto& s : d.train) CHECK(s.u0_h1 <= 0.3 + 1e-12);

    const RunManifest m = read_manifest(p1 + ".manifest.json");
    CHECK(m.command == "gen-data");
    REQUIRE(m.outputs.size() == 1);
    CHECK(m.outputs[0].second == io::checksum_hex(io::file_checksum(p1)));
}

TEST_CASE("train command end to end with reproducible outputs") {
    const auto dir = fresh_dir("train");
    const auto data = (dir / "data.bin").string();
    cli::cmd_gen_data(small_gen(data));

    cli::TrainOptions t;
    t.data = data;
    t.modes = 4;
    t.width = 8;
    t.epochs = 3;
    t.batch_size = 3;
    t.seed = 7;
    t.out_dir = (dir / "run_a").string();
    CHECK(cli::cmd_train(t) == 0);
    CHECK(fs::exists(t.out_dir + "/curve.csv"));
    CHECK(fs::exists(t.out_dir + "/best.fno"));
    CHECK(fs::exists(t.out_dir + "/final.fno"));
    CHECK(fs::exists(t.out_dir + "/manifest.json"));

    const LearningCurve c = load_curve_csv(t.out_dir + "/curve.csv");
    CHECK(c.records.size() == 3);

    cli::TrainOptions t2 = t;
    t2.out_dir = (dir / "run_b").string();
    CHECK(cli::cmd_train(t2) == 0);
    CHECK(io::read_text_file(t.out_dir + "/curve.csv") ==
          io::read_text_file(t2.out_dir + "/curve.csv"));
    CHECK(io::read_text_file(t.out_dir + "/best.fno") ==
          io::read_text_file(t2.out_dir + "/best.fno"));
    CHECK(io::read_text_file(t.out_dir + "/final.fno") ==
          io::read_text_file(t2.out_dir + "/final.fno"));

    // flat curve when nothing can move
    cli::TrainOptions frozen = t;
    frozen.epochs = 2;
    frozen.lr = 0.0;
    frozen.out_dir = (dir / "run_frozen").string();
    CHECK(cli::cmd_train(frozen) == 0);
    const LearningCurve fc = load_curve_csv(frozen.out_dir + "/curve.csv");
    REQUIRE(fc.records.size() == 2);
    CHECK(fc.records[0].test_loss == fc.records[1].test_loss);

    cli::TrainOptions bad = t;
    bad.modes = 60; // beyond n/2 for grid 64
    bad.out_dir = (dir / "run_bad").string();
    CHECK_THROWS_WITH_AS(cli::cmd_train(bad), doctest::Contains("Nyquist"), Error);
}

TEST_CASE("sweep command: records, both reports, diagnostics") {
    const auto dir = fresh_dir("sweep");
    const auto data = (dir / "data.bin").string();
    cli::cmd_gen_data(small_gen(data));

    cli::SweepOptions s;
    s.data = data;
    s.configs = {"4x4", "4x8"};
    s.epochs = 2;
    s.batch_size = 3;
    s.seed = 1;
    s.out_dir = (dir / "out").string();
    CHECK(cli::cmd_sweep(s) == 0);
    CHECK(fs::exists(s.out_dir + "/sweep_records.json"));
    for (const char* f : {"/report_best.json", "/report_best.csv", "/report_final.json",
                          "/report_final.csv", "/manifest.json"})
        CHECK(fs::exists(s.out_dir + f));

    const auto jrec = nlohmann::json::parse(io::read_text_file(s.out_dir + "/sweep_records.json"));
    REQUIRE(jrec.size() == 2);
    for (const auto& j : jrec) {
        const auto r = j.get<SweepRecord>();
        CHECK(r.best_test_loss <= r.final_test_loss);
        CHECK(r.n_params == param_count(r.config));
    }

    // a single-config sweep surfaces the >= 2 points precondition
    cli::SweepOptions single = s;
    single.configs = {"4x4"};
    single.out_dir = (dir / "single").string();
    CHECK_THROWS_WITH_AS(cli::cmd_sweep(single), doctest::Contains(">= 2"), Error);
    CHECK(fs::exists(single.out_dir + "/sweep_records.json"));

    CHECK_THROWS_AS(cli::parse_config_spec("8by32", "gelu"), Error);
}

TEST_CASE("sweep --fit-only reproduces the reference-table fit") {
    const auto dir = fresh_dir("fit");
    const auto pts = (dir / "points.csv").string();
    io::write_text_file(pts, "N,error\n"
                             "74209,6.87e-7\n"
                             "237137,6.01e-7\n"
                             "549569,4.80e-7\n"
                             "1819553,4.93e-7\n");
    cli::SweepOptions s;
    s.fit_only = true;
    s.points = pts;
    s.out_dir = (dir / "out").string();
    CHECK(cli::cmd_sweep(s) == 0);
    const auto j = nlohmann::json::parse(io::read_text_file(s.out_dir + "/fit.json"));
    const double alpha = j.at("fit").at("alpha").get<double>();
    const double C = j.at("fit").at("C").get<double>();
    CHECK(alpha > 0.109);
    CHECK(alpha < 0.119);
    CHECK(C > 1.7e-6);
    CHECK(C < 3.4e-6);

    cli::SweepOptions nofile;
    nofile.fit_only = true;
    CHECK_THROWS_AS(cli::cmd_sweep(nofile), Error);
}

TEST_CASE("export-figures produces the four figure files") {
    const auto dir = fresh_dir("figs");
    const auto data = (dir / "data.bin").string();
    cli::cmd_gen_data(small_gen(data));

    cli::SweepOptions s;
    s.data = data;
    s.configs = {"4x4", "4x8"};
    s.epochs = 2;
    s.batch_size = 3;
    s.out_dir = (dir / "sweep").string();
    REQUIRE(cli::cmd_sweep(s) == 0);

    cli::ExportFiguresOptions f;
    f.sweep_dir = s.out_dir;
    f.data = data;
    f.out_dir = (dir / "figures").string();
    CHECK(cli::cmd_export_figures(f) == 0);
    for (const char* name : {"/fig1_qualitative.csv", "/fig2_learning_curves.csv",
                             "/fig3_longrun_curves.csv", "/fig4_scaling_best.csv",
                             "/fig4_scaling_final.csv", "/fig4_fit.json"}) {
        CAPTURE(name);
        CHECK(fs::exists(f.out_dir + name));
        CHECK(fs::file_size(f.out_dir + name) > 0);
    }

    // fig1 prediction column is the forward pass of the stored best model
    const auto jrec =
        nlohmann::json::parse(io::read_text_file(s.out_dir + "/sweep_records.json"));
    SweepRecord bestrec = jrec[0].get<SweepRecord>();
    for (const auto& j : jrec) {
        const auto r = j.get<SweepRecord>();
        if (r.best_test_loss < bestrec.best_test_loss) bestrec = r;
    }
    const FnoParams params = load_checkpoint(bestrec.run_dir + "/best.fno");
    const Dataset d = load_dataset(data);
    const RealField pred = forward(params, d.test.front().u0);
    std::istringstream in(io::read_text_file(f.out_dir + "/fig1_qualitative.csv"));
    std::string line;
    std::getline(in, line); // header
    std::getline(in, line);
    std::istringstream ls(line);
    double x, u0, ut, up;
    char c;
    ls >> x >> c >> u0 >> c >> ut >> c >> up;
    CHECK(up == pred[0]);

    // fig4 carries the benchmark column
    const std::string fig4 = io::read_text_file(f.out_dir + "/fig4_scaling_best.csv");
    CHECK(fig4.rfind("N,error,fit,benchmark\n", 0) == 0);

    cli::ExportFiguresOptions missing;
    missing.sweep_dir = (dir / "nope").string();
    missing.data = data;
    CHECK_THROWS_WITH_AS(cli::cmd_export_figures(missing),
                         doctest::Contains("sweep_records.json"), Error);
}

TEST_CASE("replay regenerates byte-identical outputs from the manifest alone") {
    const auto dir = fresh_dir("replay");
    const auto data = (dir / "data.bin").string();
    cli::cmd_gen_data(small_gen(data));
    const std::string bytes = io::read_text_file(data);

    fs::remove(data);
    CHECK(cli::cmd_replay(data + ".manifest.json") == 0);
    CHECK(io::read_text_file(data) == bytes);

    CHECK_THROWS_AS(cli::cmd_replay((dir / "missing.json").string()), io::IoError);
}

TEST_CASE("FNOLAB_OUT_ROOT redirects relative outputs") {
    const auto dir = fresh_dir("outroot");
    setenv("FNOLAB_OUT_ROOT", dir.c_str(), 1);
    cli::GenDataOptions o = small_gen("nested/data.bin");
    CHECK(cli::cmd_gen_data(o) == 0);
    unsetenv("FNOLAB_OUT_ROOT");
    CHECK(fs::exists(dir / "nested" / "data.bin"));
    CHECK_FALSE(fs::exists("nested/data.bin"));
}
