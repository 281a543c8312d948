#pragma once

// Pseudospectral integrator for u_t + u u_x = nu u_xx on the periodic unit
// interval. Diffusion is handled exactly through integrating factors; the
// conservative nonlinearity -(1/2) d/dx (u^2) is advanced with classical RK4
// and de-aliased with the 2/3 rule. A Cole-Hopf closed form provides an exact
// solution for verification.

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "fnolab/spectral.hpp"

namespace fnolab {

struct SolverConfig {
    double nu = 0.01;
    double t_final = 1.0;
    double dt = 1e-3;
    bool dealias = true;
    int n = 256;

    void validate() const {
        if (!(nu > 0.0)) throw Error("SolverConfig: nu must be positive");
        if (!(t_final > 0.0)) throw Error("SolverConfig: t_final must be positive");
        if (!(dt > 0.0) || dt > t_final) throw Error("SolverConfig: need 0 < dt <= t_final");
        PeriodicGrid{n};
    }
};

// u = -2 nu phi_x / phi with phi = a + b e^{-4pi^2 nu t} cos(2pi x); phi solves
// the heat equation, so u solves Burgers exactly. a > |b| keeps phi positive.
struct ColeHopfParams {
    double a = 2.0;
    double b = 1.0;
    double nu = 0.05;

    void validate() const {
        if (!(a > std::abs(b))) throw Error("ColeHopfParams: need a > |b|");
        if (!(nu > 0.0)) throw Error("ColeHopfParams: nu must be positive");
    }
};

inline double cole_hopf_exact(const ColeHopfParams& p, double x, double t) {
    p.validate();
    if (t < 0.0) throw Error("cole_hopf_exact: t must be non-negative");
    const double decay = std::exp(-4.0 * std::numbers::pi * std::numbers::pi * p.nu * t);
    const double num = 4.0 * std::numbers::pi * p.nu * p.b * decay * std::sin(kTwoPi * x);
    const double den = p.a + p.b * decay * std::cos(kTwoPi * x);
    return num / den;
}

inline RealField cole_hopf_field(const ColeHopfParams& p, PeriodicGrid g, double t) {
    return RealField::sample(g, [&](double x) { return cole_hopf_exact(p, x, t); });
}

namespace detail {

// spectral-space right-hand side machinery shared by solve and the
// conservation report; state is the half spectrum under the 1/n normalization
struct BurgersStepper {
    int n;
    int bins;
    int kcut; // highest retained wavenumber when forming the quadratic term
    double nu;
    std::vector<std::complex<double>> state;
    std::vector<std::complex<double>> buf_full; // size-n scratch for transforms
    std::vector<std::complex<double>> k1, k2, k3, k4, stage;
    std::vector<std::complex<double>> e_half, e_full;
    double t = 0.0;

    BurgersStepper(const RealField& u0, const SolverConfig& cfg)
        : n(cfg.n), bins(cfg.n / 2 + 1), kcut(cfg.dealias ? cfg.n / 3 : cfg.n / 2), nu(cfg.nu),
          buf_full(static_cast<std::size_t>(cfg.n)), k1(bins), k2(bins), k3(bins), k4(bins),
          stage(bins), e_half(bins), e_full(bins) {
        const SpectralField s = forward_transform(u0);
        state = s.coeffs;
    }

    void set_factors(double dt) {
        for (int k = 0; k < bins; ++k) {
            const double lam = -nu * std::pow(kTwoPi * k, 2);
            e_half[k] = {std::exp(0.5 * dt * lam), 0.0};
            e_full[k] = {std::exp(dt * lam), 0.0};
        }
    }

    // spectrum -> physical samples (unnormalized inverse cancels 1/n forward)
    void to_physical(const std::vector<std::complex<double>>& c, std::vector<double>& u) {
        buf_full[0] = {c[0].real(), 0.0};
        buf_full[n / 2] = {c[n / 2].real(), 0.0};
        for (int k = 1; k < n / 2; ++k) {
            buf_full[k] = c[k];
            buf_full[n - k] = std::conj(c[k]);
        }
        fft(buf_full, true);
        u.resize(n);
        for (int j = 0; j < n; ++j) u[j] = buf_full[j].real();
    }

    // N(c) = -(1/2) d/dx F(u^2), de-aliased; writes into out
    void nonlinear(const std::vector<std::complex<double>>& c,
                   std::vector<std::complex<double>>& out) {
        // mask the input spectrum, go physical, square
        for (int k = 0; k < bins; ++k) stage[k] = (k <= kcut) ? c[k] : std::complex<double>{0, 0};
        std::vector<double> u;
        to_physical(stage, u);
        for (int j = 0; j < n; ++j) buf_full[j] = {u[j] * u[j], 0.0};
        fft(buf_full, false);
        const double inv_n = 1.0 / n;
        for (int k = 0; k < bins; ++k) {
            if (k > kcut || k == n / 2) {
                out[k] = {0.0, 0.0}; // 2/3 mask; odd derivative zeroes Nyquist anyway
            } else {
                const std::complex<double> w2 = buf_full[k] * inv_n;
                out[k] = std::complex<double>{0.0, -0.5 * kTwoPi * k} * w2;
            }
        }
    }

    void check_finite(const char* where) const {
        for (const auto& c : state)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw Error(std::string("burgers solve: non-finite state at t=") +
                            std::to_string(t) + " (" + where + ")");
    }

    // one integrating-factor RK4 step of size dt (factors must match dt)
    void step(double dt) {
        nonlinear(state, k1);
        for (int k = 0; k < bins; ++k) stage[k] = e_half[k] * (state[k] + 0.5 * dt * k1[k]);
        nonlinear(stage, k2);
        for (int k = 0; k < bins; ++k) stage[k] = e_half[k] * state[k] + 0.5 * dt * k2[k];
        nonlinear(stage, k3);
        for (int k = 0; k < bins; ++k) stage[k] = e_full[k] * state[k] + dt * e_half[k] * k3[k];
        nonlinear(stage, k4);
        for (int k = 0; k < bins; ++k)
            state[k] = e_full[k] * state[k] +
                       (dt / 6.0) * (e_full[k] * k1[k] + 2.0 * e_half[k] * (k2[k] + k3[k]) + k4[k]);
        t += dt;
        check_finite("post-step");
    }

    // advance to target time using steps no larger than dt_max
    void advance_to(double t_target, double dt_max) {
        const double span = t_target - t;
        if (span <= 0.0) return;
        const int steps = static_cast<int>(std::ceil(span / dt_max - 1e-12));
        const double dt = span / steps;
        set_factors(dt);
        for (int s = 0; s < steps; ++s) step(dt);
        t = t_target; // avoid accumulation drift
    }

    RealField snapshot(PeriodicGrid g) {
        std::vector<double> u;
        to_physical(state, u);
        return RealField(g, std::move(u));
    }
};

} // namespace detail

inline RealField solve(const RealField& u0, const SolverConfig& cfg) {
    cfg.validate();
    if (u0.grid.n != cfg.n) throw Error("solve: u0 grid does not match cfg.n");
    require_all_finite(u0, "solve");
    detail::BurgersStepper st(u0, cfg);
    st.advance_to(cfg.t_final, cfg.dt);
    return st.snapshot(u0.grid);
}

struct ConservationSample {
    double t;
    double mean;
    double energy; // (1/2) h sum u^2
};

struct ConservationReport {
    std::vector<ConservationSample> samples;
};

inline ConservationReport conservation_report(const RealField& u0, const SolverConfig& cfg,
                                              std::span<const double> checkpoints) {
    cfg.validate();
    if (u0.grid.n != cfg.n) throw Error("conservation_report: u0 grid does not match cfg.n");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 0.0 || checkpoints[i] > cfg.t_final)
            throw Error("conservation_report: checkpoint outside [0, t_final]");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
            throw Error("conservation_report: checkpoints must be increasing");
    }
    detail::BurgersStepper st(u0, cfg);
    ConservationReport rep;
    const double h = u0.grid.spacing();
    auto record = [&](double t) {
        std::vector<double> u;
        st.to_physical(st.state, u);
        double m = 0.0, e = 0.0;
        for (double v : u) {
            m += v;
            e += v * v;
        }
        rep.samples.push_back({t, m / cfg.n, 0.5 * h * e});
    };
    for (double tc : checkpoints) {
        st.advance_to(tc, cfg.dt);
        record(tc);
    }
    return rep;
}

} // namespace fnolab
