#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "fnolab/datagen.hpp"

using namespace fnolab;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const auto d = fs::temp_directory_path() / "fnolab_datagen_test";
    fs::create_directories(d);
    return d;
}

SolverConfig small_solver() {
    SolverConfig s;
    s.n = 64;
    s.nu = 0.01;
    s.dt = 5e-3;
    return s;
}

} // namespace

TEST_CASE("samples stay inside the H1 ball") {
    SamplerConfig cfg;
    cfg.seed = 11;
    const PeriodicGrid g(256);
    for (std::uint64_t i = 0; i < 50; ++i) {
        const RealField f = sample_initial_condition(cfg, g, Split::train, i);
        const double h1 = hs_norm(f, 1.0);
        CHECK(h1 <= cfg.radius + 1e-12);
        CHECK(h1 >= 0.5 * cfg.radius - 1e-12);
    }
}

TEST_CASE("zero-mean samples have negligible mean") {
    SamplerConfig cfg;
    cfg.seed = 3;
    const PeriodicGrid g(256);
    for (std::uint64_t i = 0; i < 20; ++i) {
        const RealField f = sample_initial_condition(cfg, g, Split::test, i);
        CHECK(std::abs(mean(f)) <= 1e-14);
    }
}

TEST_CASE("sampling is deterministic per (seed, split, index)") {
    SamplerConfig cfg;
    cfg.seed = 99;
    const PeriodicGrid g(128);
    const RealField a = sample_initial_condition(cfg, g, Split::train, 5);
    const RealField b = sample_initial_condition(cfg, g, Split::train, 5);
    CHECK(a == b);
    const RealField c = sample_initial_condition(cfg, g, Split::test, 5);
    CHECK_FALSE(a == c);
}

TEST_CASE("non-zero-mean option respects the ball bound") {
    SamplerConfig cfg;
    cfg.seed = 4;
    cfg.zero_mean = false;
    const PeriodicGrid g(128);
    bool saw_mean = false;
    for (std::uint64_t i = 0; i < 10; ++i) {
        const RealField f = sample_initial_condition(cfg, g, Split::train, i);
        CHECK(hs_norm(f, 1.0) <= cfg.radius + 1e-12);
        if (std::abs(mean(f)) > 1e-6) saw_mean = true;
    }
    CHECK(saw_mean);
}

TEST_CASE("sampler validation") {
    const PeriodicGrid g(64);
    SamplerConfig cfg;
    cfg.k_max = 0;
    CHECK_THROWS_AS(sample_initial_condition(cfg, g, Split::train, 0), Error);
    cfg = SamplerConfig{};
    cfg.k_max = 30; // above n/3 for n=64
    CHECK_THROWS_AS(sample_initial_condition(cfg, g, Split::train, 0), Error);
    cfg = SamplerConfig{};
    cfg.radius = -0.1;
    CHECK_THROWS_AS(sample_initial_condition(cfg, g, Split::train, 0), Error);
}

TEST_CASE("build_dataset produces solver-consistent pairs") {
    SamplerConfig sampler;
    sampler.seed = 21;
    const SolverConfig solver = small_solver();
    const Dataset d = build_dataset(sampler, solver, 3, 2);
    REQUIRE(d.train.size() == 3);
    REQUIRE(d.test.size() == 2);
    for (const auto& p : d.train) {
        CHECK(p.u0_h1 <= sampler.radius + 1e-12);
        const RealField re = solve(p.u0, solver);
        CHECK(re == p.uT); // same inputs, same bits
    }
    // energy decay in L2 for every stored pair
    for (const auto& p : d.test) {
        CHECK(hs_norm(p.uT, 0.0) <= hs_norm(p.u0, 0.0) + 1e-10);
    }
}

TEST_CASE("train samples do not depend on the test-split size") {
    SamplerConfig sampler;
    sampler.seed = 77;
    const SolverConfig solver = small_solver();
    const Dataset a = build_dataset(sampler, solver, 3, 1);
    const Dataset b = build_dataset(sampler, solver, 3, 4);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a.train[i].u0 == b.train[i].u0);
        CHECK(a.train[i].uT == b.train[i].uT);
    }
}

TEST_CASE("a Cole-Hopf initial condition propagates to the closed form") {
    SolverConfig solver;
    solver.n = 256;
    solver.nu = 0.05;
    solver.dt = 1e-3;
    const PeriodicGrid g(solver.n);
    const ColeHopfParams p{2.0, 1.0, solver.nu};
    const RealField u0 = cole_hopf_field(p, g, 0.0);
    const RealField uT = solve(u0, solver);
    const RealField exact = cole_hopf_field(p, g, 1.0);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.n; ++i) {
        num += (uT[i] - exact[i]) * (uT[i] - exact[i]);
        den += exact[i] * exact[i];
    }
    CHECK(std::sqrt(num / den) <= 1e-6);
}

TEST_CASE("dataset save/load round trip is exact and reproducible") {
    SamplerConfig sampler;
    sampler.seed = 5;
    const Dataset d = build_dataset(sampler, small_solver(), 4, 0);
    const auto p1 = (temp_dir() / "d1.bin").string();
    const auto p2 = (temp_dir() / "d2.bin").string();
    save_dataset(d, p1);
    save_dataset(d, p2);
    CHECK(io::read_text_file(p1) == io::read_text_file(p2));

    const Dataset back = load_dataset(p1);
    CHECK(back == d);
    CHECK(back.sampler.seed == d.sampler.seed);
    CHECK(back.solver.nu == d.solver.nu);
}

TEST_CASE("dataset file failure modes") {
    const Dataset d = build_dataset(SamplerConfig{}, small_solver(), 1, 0);
    const auto path = (temp_dir() / "bad.bin").string();
    save_dataset(d, path);

    std::string whole = io::read_text_file(path);
    io::write_text_file(path, whole.substr(0, whole.size() - 16));
    CHECK_THROWS_AS(load_dataset(path), io::ChecksumFailure);

    const auto vpath = (temp_dir() / "ver.bin").string();
    save_dataset(d, vpath);
    whole = io::read_text_file(vpath);
    const auto pos = whole.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    whole[pos + 10] = '9';
    io::write_text_file(vpath, whole);
    CHECK_THROWS_AS(load_dataset(vpath), io::VersionMismatch);
}
