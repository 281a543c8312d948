#pragma once

// Periodic pseudospectral toolbox: transforms under the mean-preserving 1/n
// normalization, spectral differentiation, discrete Sobolev norms in both the
// spectral and finite-difference flavors, and mode-truncation projection.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "fnolab/fft.hpp"
#include "fnolab/grid.hpp"
#include "fnolab/rng.hpp"

namespace fnolab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// coeffs[k] = (1/n) sum_j f_j e^{-2pi i k j / n}, k = 0..n/2.
// Bin 0 equals the field mean; the gradient code relies on this normalization.
inline SpectralField forward_transform(const RealField& f) {
    require_all_finite(f, "forward_transform");
    const int n = f.grid.n;
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) buf[j] = {f[j], 0.0};
    detail::fft(buf, false);
    SpectralField out(f.grid);
    const double inv_n = 1.0 / n;
    for (int k = 0; k <= n / 2; ++k) out[k] = buf[k] * inv_n;
    // bins 0 and n/2 are mathematically real for real input; clamp round-off
    out[0] = {out[0].real(), 0.0};
    out[n / 2] = {out[n / 2].real(), 0.0};
    return out;
}

inline void require_hermitian_layout(const SpectralField& s, const char* what) {
    const int nq = s.grid.n / 2;
    if (static_cast<int>(s.coeffs.size()) != nq + 1)
        throw Error(std::string(what) + ": coeffs.size() != n/2 + 1");
    double scale = 0.0;
    for (const auto& c : s.coeffs) scale = std::max(scale, std::abs(c));
    const double tol = 1e-12 * (1.0 + scale);
    if (std::abs(s[0].imag()) > tol)
        throw Error(std::string(what) + ": mean bin has non-zero imaginary part");
    if (std::abs(s[nq].imag()) > tol)
        throw Error(std::string(what) + ": Nyquist bin has non-zero imaginary part");
}

inline RealField inverse_transform(const SpectralField& s) {
    require_hermitian_layout(s, "inverse_transform");
    const int n = s.grid.n;
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(n));
    buf[0] = {s[0].real(), 0.0};
    buf[n / 2] = {s[n / 2].real(), 0.0};
    for (int k = 1; k < n / 2; ++k) {
        buf[k] = s[k];
        buf[n - k] = std::conj(s[k]);
    }
    detail::fft(buf, true); // unnormalized inverse cancels the 1/n forward factor
    RealField out(s.grid);
    for (int j = 0; j < n; ++j) out[j] = buf[j].real();
    return out;
}

// Multiply bin k by (2pi i k)^order. The Nyquist derivative is not representable
// for odd orders, so that bin is zeroed there (standard pseudospectral practice).
inline SpectralField spectral_derivative(const SpectralField& s, int order) {
    if (order < 1) throw Error("spectral_derivative: order must be >= 1");
    SpectralField out = s;
    const int nq = s.grid.n / 2;
    for (int k = 0; k <= nq; ++k) {
        const double mag = std::pow(kTwoPi * k, order);
        std::complex<double> mult;
        switch (order % 4) { // i^order cycle
            case 0: mult = {mag, 0.0}; break;
            case 1: mult = {0.0, mag}; break;
            case 2: mult = {-mag, 0.0}; break;
            default: mult = {0.0, -mag}; break;
        }
        out[k] *= mult;
    }
    if (order % 2 == 1) out[nq] = {0.0, 0.0};
    return out;
}

// Spectral Sobolev norm: ( sum_k m_k w_k |f_k|^2 )^{1/2} with weight
// w_k = 1 + |2pi k|^{2s} (plain 1 for s = 0, where the norm is the L2 norm)
// and multiplicity m_k = 2 for the conjugate pairs 0 < k < n/2.
inline double hs_norm(const RealField& f, double s) {
    if (s < 0.0) throw Error("hs_norm: order s must be non-negative");
    const SpectralField c = forward_transform(f);
    const int nq = f.grid.n / 2;
    double acc = 0.0;
    for (int k = 0; k <= nq; ++k) {
        const double weight = (s == 0.0) ? 1.0 : 1.0 + std::pow(kTwoPi * k, 2.0 * s);
        const double mult = (k == 0 || k == nq) ? 1.0 : 2.0;
        acc += mult * weight * std::norm(c[k]);
    }
    return std::sqrt(acc);
}

enum class FdScheme { central, forward };

// Periodic finite-difference gradient; central (2nd order) by default.
inline RealField fd_gradient(const RealField& f, FdScheme scheme = FdScheme::central) {
    const int n = f.grid.n;
    const double h = f.grid.spacing();
    RealField out(f.grid);
    if (scheme == FdScheme::central) {
        for (int i = 0; i < n; ++i) {
            const int ip = (i + 1) % n;
            const int im = (i + n - 1) % n;
            out[i] = (f[ip] - f[im]) / (2.0 * h);
        }
    } else {
        for (int i = 0; i < n; ++i) out[i] = (f[(i + 1) % n] - f[i]) / h;
    }
    return out;
}

// h*sum f^2 + h*sum (D f)^2 with the periodic central-difference D and the
// rectangle rule, which is exact for trigonometric polynomials below Nyquist.
inline double h1_fd_norm_sq(const RealField& f) {
    const int n = f.grid.n;
    const double h = f.grid.spacing();
    const RealField g = fd_gradient(f);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += f[i] * f[i] + g[i] * g[i];
    return h * acc;
}

// Truncation projection P_N: zero every coefficient with wavenumber above N.
// Idempotent, and the identity on fields bandlimited to <= N.
inline RealField project_modes(const RealField& f, int n_modes) {
    const int nq = f.grid.n / 2;
    if (n_modes < 0) throw Error("project_modes: N must be non-negative");
    if (n_modes > nq) throw Error("project_modes: N exceeds Nyquist wavenumber n/2");
    SpectralField c = forward_transform(f);
    for (int k = n_modes + 1; k <= nq; ++k) c[k] = {0.0, 0.0};
    return inverse_transform(c);
}

namespace detail {

// least-squares slope of y against x
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

} // namespace detail

// Empirical truncation-decay exponent. Random fields are synthesized with
// |f_k| ~ k^{-(s + 1/2 + 0.01)} and random phases, so the L2 tail beyond N
// scales like N^{-(s+0.01)}; the fitted log-log slope should come out near -s.
inline double projection_decay_rate(double s, std::span<const int> ns, int trials,
                                    std::uint64_t rng_seed, int grid_n = 512) {
    if (s <= 0.0) throw Error("projection_decay_rate: regularity s must be positive");
    if (trials < 1) throw Error("projection_decay_rate: trials must be >= 1");
    if (ns.size() < 2) throw Error("projection_decay_rate: need >= 2 distinct N for a fit");
    const PeriodicGrid grid(grid_n);
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] > grid.nyquist()) throw Error("projection_decay_rate: N exceeds n/2");
        if (i > 0 && ns[i] <= ns[i - 1])
            throw Error("projection_decay_rate: Ns must be strictly increasing");
    }
    std::vector<double> mean_err(ns.size(), 0.0);
    for (int t = 0; t < trials; ++t) {
        KeyedRng rng(rng_seed, "projection-decay", static_cast<std::uint64_t>(t));
        SpectralField c(grid);
        for (int k = 1; k < grid.nyquist(); ++k) {
            const double amp = std::pow(static_cast<double>(k), -(s + 0.51));
            const double phase = kTwoPi * rng.uniform01();
            c[k] = {amp * std::cos(phase), amp * std::sin(phase)};
        }
        const RealField f = inverse_transform(c);
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const RealField tail = f - project_modes(f, ns[i]);
            mean_err[i] += hs_norm(tail, 0.0);
        }
    }
    std::vector<double> log_n(ns.size()), log_e(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        log_n[i] = std::log(static_cast<double>(ns[i]));
        log_e[i] = std::log(mean_err[i] / trials);
    }
    return detail::ols_slope(log_n, log_e);
}

} // namespace fnolab
