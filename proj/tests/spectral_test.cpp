#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fnolab/rng.hpp"
#include "fnolab/spectral.hpp"

using namespace fnolab;

namespace {

constexpr double pi = std::numbers::pi;

RealField random_field(PeriodicGrid g, std::uint64_t seed, double amp = 1.0) {
    KeyedRng rng(seed, "test-field", 0);
    RealField f(g);
    for (int i = 0; i < g.n; ++i) f[i] = rng.uniform(-amp, amp);
    return f;
}

// Independent quadrature oracle for the continuum H^s norm of a function with
// known derivative: rectangle rule on a much finer grid than anything under test.
double h1_quadrature_oracle(double (*f)(double), double (*df)(double)) {
    const int nq = 1 << 16;
    const double h = 1.0 / nq;
    double acc = 0.0;
    for (int i = 0; i < nq; ++i) {
        const double x = i * h;
        acc += f(x) * f(x) + df(x) * df(x);
    }
    return std::sqrt(h * acc);
}

double l2_quadrature_oracle(double (*f)(double)) {
    const int nq = 1 << 16;
    const double h = 1.0 / nq;
    double acc = 0.0;
    for (int i = 0; i < nq; ++i) {
        const double x = i * h;
        acc += f(x) * f(x);
    }
    return std::sqrt(h * acc);
}

double sin1(double x) { return std::sin(2.0 * pi * x); }
double dsin1(double x) { return 2.0 * pi * std::cos(2.0 * pi * x); }

} // namespace

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(PeriodicGrid(3), Error);
    CHECK_THROWS_AS(PeriodicGrid(7), Error);
    CHECK_THROWS_AS(PeriodicGrid(0), Error);
    const PeriodicGrid g(8);
    CHECK(g.point(0) == 0.0);
    CHECK(g.point(7) == doctest::Approx(1.0 - g.spacing()));
    for (int i = 1; i < g.n; ++i) CHECK(g.point(i) > g.point(i - 1));
}

TEST_CASE("forward transform of constant and single mode") {
    const PeriodicGrid g(8);
    const auto c1 = forward_transform(RealField::sample(g, [](double) { return 1.0; }));
    CHECK(c1[0].real() == doctest::Approx(1.0).epsilon(1e-14));
    for (int k = 1; k <= 4; ++k) CHECK(std::abs(c1[k]) < 1e-14);

    const auto cs = forward_transform(RealField::sample(g, sin1));
    CHECK(cs[1].real() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(cs[1].imag() == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(std::abs(cs[0]) < 1e-14);
    for (int k = 2; k <= 4; ++k) CHECK(std::abs(cs[k]) < 1e-14);
}

TEST_CASE("forward transform rejects non-finite input") {
    RealField f{PeriodicGrid(8)};
    f[3] = std::nan("");
    CHECK_THROWS_AS(forward_transform(f), Error);
}

TEST_CASE("inverse transform basics") {
    const PeriodicGrid g(8);
    SpectralField s(g);
    s[0] = {2.5, 0.0};
    const RealField c = inverse_transform(s);
    for (int i = 0; i < g.n; ++i) CHECK(c[i] == doctest::Approx(2.5).epsilon(1e-14));

    SpectralField m(g);
    m[1] = {0.0, -0.5};
    const RealField f = inverse_transform(m);
    for (int i = 0; i < g.n; ++i)
        CHECK(f[i] == doctest::Approx(sin1(g.point(i))).epsilon(1e-13));
}

TEST_CASE("inverse transform rejects broken Hermitian layout") {
    SpectralField s{PeriodicGrid(8)};
    s[0] = {1.0, 0.3};
    CHECK_THROWS_AS(inverse_transform(s), Error);
    SpectralField t{PeriodicGrid(8)};
    t[4] = {1.0, 0.3};
    CHECK_THROWS_AS(inverse_transform(t), Error);
}

TEST_CASE("round trip is the identity to 1e-12 per sample") {
    for (int n : {8, 64, 256, 1024}) {
        const PeriodicGrid g(n);
        const RealField f = random_field(g, 42 + n);
        const RealField back = inverse_transform(forward_transform(f));
        for (int i = 0; i < n; ++i) CHECK(std::abs(back[i] - f[i]) <= 1e-12);
    }
}

TEST_CASE("round trip on a random spectrum") {
    const PeriodicGrid g(64);
    KeyedRng rng(7, "spectrum", 0);
    SpectralField s(g);
    s[0] = {rng.uniform(-1, 1), 0.0};
    s[32] = {rng.uniform(-1, 1), 0.0};
    for (int k = 1; k < 32; ++k) s[k] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const SpectralField s2 = forward_transform(inverse_transform(s));
    for (int k = 0; k <= 32; ++k) CHECK(std::abs(s2[k] - s[k]) <= 1e-12);
}

TEST_CASE("spectral derivative of analytic fields") {
    const PeriodicGrid g(32);
    const auto ds = inverse_transform(spectral_derivative(forward_transform(RealField::sample(g, sin1)), 1));
    for (int i = 0; i < g.n; ++i)
        CHECK(ds[i] == doctest::Approx(dsin1(g.point(i))).epsilon(1e-12));

    const auto dc = inverse_transform(
        spectral_derivative(forward_transform(RealField::sample(g, [](double) { return 3.0; })), 2));
    for (int i = 0; i < g.n; ++i) CHECK(std::abs(dc[i]) < 1e-12);

    // cos(4pix), order 2 -> -16pi^2 cos(4pix)
    const auto d2 = inverse_transform(spectral_derivative(
        forward_transform(RealField::sample(g, [](double x) { return std::cos(4.0 * pi * x); })), 2));
    for (int i = 0; i < g.n; ++i)
        CHECK(d2[i] ==
              doctest::Approx(-16.0 * pi * pi * std::cos(4.0 * pi * g.point(i))).epsilon(1e-12));
}

TEST_CASE("odd-order derivative zeroes the Nyquist bin") {
    const PeriodicGrid g(8);
    SpectralField s(g);
    s[4] = {1.0, 0.0};
    const auto d = spectral_derivative(s, 1);
    CHECK(std::abs(d[4]) == 0.0);
    const auto d2 = spectral_derivative(s, 2);
    CHECK(d2[4].real() == doctest::Approx(-std::pow(kTwoPi * 4, 2)).epsilon(1e-14));
}

TEST_CASE("hs_norm against quadrature oracle") {
    const PeriodicGrid g(256);
    const RealField f = RealField::sample(g, sin1);
    // frozen oracle values: sqrt(1/2 + 2pi^2) and sqrt(1/2)
    CHECK(h1_quadrature_oracle(sin1, dsin1) == doctest::Approx(4.49880).epsilon(1e-5));
    CHECK(l2_quadrature_oracle(sin1) == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK(hs_norm(f, 1.0) == doctest::Approx(h1_quadrature_oracle(sin1, dsin1)).epsilon(1e-10));
    CHECK(hs_norm(f, 0.0) == doctest::Approx(l2_quadrature_oracle(sin1)).epsilon(1e-10));
}

TEST_CASE("hs_norm of a constant is its magnitude for any s") {
    const PeriodicGrid g(16);
    const RealField f = RealField::sample(g, [](double) { return -2.25; });
    for (double s : {0.0, 0.5, 1.0, 2.0, 3.5}) CHECK(hs_norm(f, s) == doctest::Approx(2.25).epsilon(1e-13));
}

TEST_CASE("hs_norm rejects negative order") {
    const RealField f{PeriodicGrid(8)};
    CHECK_THROWS_AS(hs_norm(f, -0.5), Error);
}

TEST_CASE("hs_norm monotone in s; Parseval at s=0") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const PeriodicGrid g(64);
        const RealField f = random_field(g, seed);
        double prev = -1.0;
        for (double s : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0}) {
            const double v = hs_norm(f, s);
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
        double l2sq = 0.0;
        for (int i = 0; i < g.n; ++i) l2sq += f[i] * f[i];
        l2sq *= g.spacing();
        const double spec = hs_norm(f, 0.0);
        CHECK(std::abs(spec * spec - l2sq) <= 1e-10 * (1.0 + l2sq));
    }
}

TEST_CASE("fd_gradient basics and Taylor bound") {
    const PeriodicGrid g(256);
    const RealField c = RealField::sample(g, [](double) { return 4.0; });
    const RealField dc = fd_gradient(c);
    for (int i = 0; i < g.n; ++i) CHECK(dc[i] == 0.0);

    const RealField f = RealField::sample(g, sin1);
    const RealField df = fd_gradient(f);
    const double h = g.spacing();
    const double bound = std::pow(kTwoPi * h, 2) * kTwoPi / 6.0;
    for (int i = 0; i < g.n; ++i) CHECK(std::abs(df[i] - dsin1(g.point(i))) <= bound);
}

TEST_CASE("fd_gradient is linear") {
    const PeriodicGrid g(64);
    const RealField f = random_field(g, 1);
    const RealField gfld = random_field(g, 2);
    const double a = 1.7, b = -0.3;
    const RealField lhs = fd_gradient(a * f + b * gfld);
    const RealField rhs = a * fd_gradient(f) + b * fd_gradient(gfld);
    for (int i = 0; i < g.n; ++i) CHECK(std::abs(lhs[i] - rhs[i]) <= 1e-12);
}

TEST_CASE("forward-difference scheme option") {
    const PeriodicGrid g(128);
    const RealField f = RealField::sample(g, sin1);
    const RealField df = fd_gradient(f, FdScheme::forward);
    // first order: error O(h), not O(h^2)
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i) worst = std::max(worst, std::abs(df[i] - dsin1(g.point(i))));
    CHECK(worst < kTwoPi * kTwoPi * g.spacing() * 1.1);
    CHECK(worst > g.spacing()); // visibly first order
}

TEST_CASE("h1_fd_norm_sq basics") {
    const PeriodicGrid g(256);
    const RealField c = RealField::sample(g, [](double) { return -1.5; });
    CHECK(h1_fd_norm_sq(c) == doctest::Approx(2.25).epsilon(1e-13));

    const RealField f = random_field(g, 9);
    const RealField z = f - f;
    CHECK(h1_fd_norm_sq(z) == 0.0);
}

TEST_CASE("h1_fd_norm_sq close to the spectral H1 norm for smooth fields") {
    const PeriodicGrid g(256);
    const RealField f = RealField::sample(g, sin1);
    const double fd = h1_fd_norm_sq(f);
    // spectral reference on a much finer grid
    const PeriodicGrid fine(4096);
    const double spec = std::pow(hs_norm(RealField::sample(fine, sin1), 1.0), 2);
    CHECK(fd <= 20.24);
    CHECK(std::abs(fd - spec) / spec < 0.005);
}

TEST_CASE("project_modes basics") {
    const PeriodicGrid g(64);
    const RealField band = RealField::sample(g, [](double x) {
        return 0.3 * std::cos(2.0 * pi * x) - 1.1 * std::sin(6.0 * pi * x);
    });
    const RealField same = project_modes(band, 3);
    for (int i = 0; i < g.n; ++i) CHECK(std::abs(same[i] - band[i]) <= 1e-13);

    const RealField f = random_field(g, 3);
    const RealField m0 = project_modes(f, 0);
    const double mu = mean(f);
    for (int i = 0; i < g.n; ++i) CHECK(m0[i] == doctest::Approx(mu).epsilon(1e-12));

    CHECK_THROWS_AS(project_modes(f, 33), Error);
    CHECK_THROWS_AS(project_modes(f, -1), Error);
}

TEST_CASE("projection idempotence and orthogonality") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const PeriodicGrid g(128);
        const RealField f = random_field(g, seed);
        const int N = 5 + static_cast<int>(seed) * 3;
        const RealField p = project_modes(f, N);
        const RealField pp = project_modes(p, N);
        for (int i = 0; i < g.n; ++i) CHECK(std::abs(pp[i] - p[i]) <= 1e-14 * (1.0 + std::abs(p[i])));

        const RealField tail = f - p;
        const double whole = std::pow(hs_norm(f, 0.0), 2);
        const double parts = std::pow(hs_norm(p, 0.0), 2) + std::pow(hs_norm(tail, 0.0), 2);
        CHECK(std::abs(whole - parts) <= 1e-10 * whole);
    }
}

TEST_CASE("projection tail for k^-2 coefficients matches brute-force tail sums") {
    const PeriodicGrid g(512);
    SpectralField s(g);
    for (int k = 1; k < g.nyquist(); ++k) s[k] = {std::pow(k, -2.0), 0.0};
    const RealField f = inverse_transform(s);

    auto tail_err = [&](int N) { return hs_norm(f - project_modes(f, N), 0.0); };
    // independent oracle: sum_{k>N} 2 k^-4 over the represented bins
    auto oracle = [&](int N) {
        double acc = 0.0;
        for (int k = N + 1; k < g.nyquist(); ++k) acc += 2.0 * std::pow(k, -4.0);
        return std::sqrt(acc);
    };
    CHECK(tail_err(8) == doctest::Approx(oracle(8)).epsilon(1e-10));
    CHECK(tail_err(16) == doctest::Approx(oracle(16)).epsilon(1e-10));
    const double ratio = tail_err(16) / tail_err(8);
    CHECK(ratio == doctest::Approx(oracle(16) / oracle(8)).epsilon(1e-10));
    CHECK(ratio == doctest::Approx(std::pow(2.0, -1.5)).epsilon(0.06));
}

TEST_CASE("projection decay rate recovers the regularity exponent") {
    const std::vector<int> ns = {4, 8, 16, 32, 64};
    const double s1 = projection_decay_rate(1.0, ns, 8, 2024, 512);
    CHECK(s1 > -1.15);
    CHECK(s1 < -0.85);
    const double s2 = projection_decay_rate(2.0, ns, 8, 2024, 512);
    CHECK(s2 > -2.25);
    CHECK(s2 < -1.75);
}

TEST_CASE("projection decay rate is deterministic and validates input") {
    const std::vector<int> ns = {4, 8, 16};
    const double a = projection_decay_rate(1.0, ns, 1, 99, 256);
    const double b = projection_decay_rate(1.0, ns, 1, 99, 256);
    CHECK(a == b);
    const std::vector<int> one = {4};
    CHECK_THROWS_AS(projection_decay_rate(1.0, one, 1, 0, 256), Error);
    const std::vector<int> unsorted = {8, 4};
    CHECK_THROWS_AS(projection_decay_rate(1.0, unsorted, 1, 0, 256), Error);
    const std::vector<int> toolarge = {4, 300};
    CHECK_THROWS_AS(projection_decay_rate(1.0, toolarge, 1, 0, 256), Error);
}

TEST_CASE("non power-of-two even grids fall back to the reference transform") {
    const PeriodicGrid g(12);
    const RealField f = random_field(g, 5);
    const RealField back = inverse_transform(forward_transform(f));
    for (int i = 0; i < g.n; ++i) CHECK(std::abs(back[i] - f[i]) <= 1e-12);
}
