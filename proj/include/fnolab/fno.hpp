#pragma once

// 1-D Fourier Neural Operator with hand-written reverse-mode differentiation
// through its fixed computational graph.
//
// Forward pipeline on a grid of n points:
//   features (u0(x_i), x_i) -> pointwise lift to `width` channels
//   L times:  [ per-channel Fourier analysis, keep modes k < m,
//               mode-wise complex (width x width) multiply, synthesis ]
//           + pointwise (width x width) map + bias, activation except after
//             the final Fourier layer
//   pointwise head: width -> fc_hidden, activation, fc_hidden -> out.
//
// Transforms use the same 1/n-normalized half-spectrum convention as the
// spectral module; since m <= n/2, the retained set k = 0..m-1 never touches
// the Nyquist bin, and the imaginary part of bin 0 drops out of the (real)
// synthesis, so its weights receive exactly zero gradient.
//
// Parameter vector layout (doubles, in order; complex as interleaved re/im):
//   lift_w[width][in], lift_b[width],
//   per layer: R[m][width][width]{re,im}, W[width][width], b[width],
//   head1_w[fc][width], head1_b[fc], head2_w[out][fc], head2_b[out]

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "fnolab/grid.hpp"
#include "fnolab/io.hpp"
#include "fnolab/rng.hpp"
#include "fnolab/spectral.hpp"

namespace fnolab {

enum class Activation { gelu, relu };

inline const char* activation_name(Activation a) { return a == Activation::gelu ? "gelu" : "relu"; }

inline Activation activation_from_name(const std::string& s) {
    if (s == "gelu") return Activation::gelu;
    if (s == "relu") return Activation::relu;
    throw Error("unknown activation '" + s + "' (expected gelu or relu)");
}

struct FnoConfig {
    int modes = 8;
    int width = 32;
    int layers = 4;
    int fc_hidden = 128;
    int in_channels = 2; // field value and coordinate
    int out_channels = 1;
    Activation activation = Activation::gelu;

    void validate() const {
        if (modes < 1 || width < 1 || layers < 1 || fc_hidden < 1 || in_channels < 1 ||
            out_channels < 1)
            throw Error("FnoConfig: all dimensions must be >= 1");
    }
};

inline void to_json(nlohmann::json& j, const FnoConfig& c) {
    j = {{"modes", c.modes},
         {"width", c.width},
         {"layers", c.layers},
         {"fc_hidden", c.fc_hidden},
         {"in_channels", c.in_channels},
         {"out_channels", c.out_channels},
         {"activation", activation_name(c.activation)}};
}
inline void from_json(const nlohmann::json& j, FnoConfig& c) {
    j.at("modes").get_to(c.modes);
    j.at("width").get_to(c.width);
    j.at("layers").get_to(c.layers);
    j.at("fc_hidden").get_to(c.fc_hidden);
    j.at("in_channels").get_to(c.in_channels);
    j.at("out_channels").get_to(c.out_channels);
    c.activation = activation_from_name(j.at("activation").get<std::string>());
}

inline std::int64_t param_count(const FnoConfig& c) {
    c.validate();
    const std::int64_t w = c.width, m = c.modes;
    const std::int64_t per_layer = 2 * w * w * m + w * w + w;
    return c.layers * per_layer + (c.in_channels * w + w) + (w * c.fc_hidden + c.fc_hidden) +
           (c.fc_hidden * c.out_channels + c.out_channels);
}

struct ParamLayout {
    std::int64_t lift_w = 0, lift_b = 0;
    struct Layer {
        std::int64_t spectral, pointwise_w, pointwise_b;
    };
    std::vector<Layer> layer;
    std::int64_t head1_w = 0, head1_b = 0, head2_w = 0, head2_b = 0;
    std::int64_t total = 0;

    explicit ParamLayout(const FnoConfig& c) {
        const std::int64_t w = c.width, m = c.modes;
        std::int64_t off = 0;
        lift_w = off;
        off += c.in_channels * w;
        lift_b = off;
        off += w;
        layer.reserve(static_cast<std::size_t>(c.layers));
        for (int l = 0; l < c.layers; ++l) {
            Layer L{};
            L.spectral = off;
            off += 2 * m * w * w;
            L.pointwise_w = off;
            off += w * w;
            L.pointwise_b = off;
            off += w;
            layer.push_back(L);
        }
        head1_w = off;
        off += c.fc_hidden * w;
        head1_b = off;
        off += c.fc_hidden;
        head2_w = off;
        off += c.out_channels * c.fc_hidden;
        head2_b = off;
        off += c.out_channels;
        total = off;
    }
};

struct FnoParams {
    FnoConfig config;
    std::vector<double> data;

    std::int64_t count() const { return static_cast<std::int64_t>(data.size()); }
};

inline FnoParams init_params(const FnoConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const ParamLayout lay(cfg);
    FnoParams p{cfg, std::vector<double>(static_cast<std::size_t>(lay.total), 0.0)};
    KeyedRng rng(seed, "fno-init", 0);
    auto fill_uniform = [&](std::int64_t off, std::int64_t count, double bound) {
        for (std::int64_t i = 0; i < count; ++i) p.data[off + i] = rng.uniform(-bound, bound);
    };
    const double w = cfg.width;
    fill_uniform(lay.lift_w, cfg.in_channels * cfg.width, 1.0 / std::sqrt(double(cfg.in_channels)));
    for (int l = 0; l < cfg.layers; ++l) {
        fill_uniform(lay.layer[l].spectral, 2 * cfg.modes * cfg.width * cfg.width, 1.0 / (w * w));
        fill_uniform(lay.layer[l].pointwise_w, cfg.width * cfg.width, 1.0 / std::sqrt(w));
    }
    fill_uniform(lay.head1_w, cfg.fc_hidden * cfg.width, 1.0 / std::sqrt(w));
    fill_uniform(lay.head2_w, cfg.out_channels * cfg.fc_hidden,
                 1.0 / std::sqrt(double(cfg.fc_hidden)));
    // biases stay zero
    return p;
}

namespace detail {

inline double act_eval(Activation a, double x) {
    if (a == Activation::relu) return x > 0.0 ? x : 0.0;
    return 0.5 * x * (1.0 + std::erf(x * 0.70710678118654752440)); // x Phi(x)
}

inline double act_grad(Activation a, double x) {
    if (a == Activation::relu) return x > 0.0 ? 1.0 : 0.0;
    const double phi = std::exp(-0.5 * x * x) * 0.39894228040143267794; // N(0,1) density
    return 0.5 * (1.0 + std::erf(x * 0.70710678118654752440)) + x * phi;
}

// cos/sin tables for the truncated transforms, cached per (n, m)
struct FourierTables {
    int n = 0, m = 0;
    std::vector<double> cosT, sinT; // [k*n + j] = cos/sin(2pi k j / n)
};

inline const FourierTables& fourier_tables(int n, int m) {
    thread_local std::unordered_map<std::uint64_t, FourierTables> cache;
    const std::uint64_t key = (static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint64_t>(m);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    FourierTables t;
    t.n = n;
    t.m = m;
    t.cosT.resize(static_cast<std::size_t>(n) * m);
    t.sinT.resize(static_cast<std::size_t>(n) * m);
    for (int k = 0; k < m; ++k) {
        for (int j = 0; j < n; ++j) {
            const double ang = kTwoPi * static_cast<double>(std::int64_t(k) * j % n) / n;
            t.cosT[static_cast<std::size_t>(k) * n + j] = std::cos(ang);
            t.sinT[static_cast<std::size_t>(k) * n + j] = std::sin(ang);
        }
    }
    return cache.emplace(key, std::move(t)).first->second;
}

} // namespace detail

// Activations recorded by a forward pass; replays bit-identically and feeds
// the exact reverse sweep. Buffers are reused across calls.
struct Tape {
    FnoConfig config;
    int n = 0;
    std::vector<double> feat;                // n * in
    std::vector<std::vector<double>> v;      // layers+1 buffers of n * w (v[0] = lift output)
    std::vector<std::vector<double>> zpre;   // layers buffers of n * w (pre-activation)
    std::vector<std::vector<double>> vhat;   // layers buffers of m * w * 2 (truncated analysis)
    std::vector<double> head1_pre, head1_act; // n * fc
    std::vector<double> out;                  // n * out_channels
};

namespace detail {

inline void forward_core(const FnoParams& p, const RealField& u0, Tape& tape) {
    const FnoConfig& c = p.config;
    c.validate();
    const int n = u0.grid.n;
    const int w = c.width, m = c.modes, fc = c.fc_hidden;
    if (m > n / 2) throw Error("fno forward: modes exceed the grid Nyquist wavenumber");
    if (c.in_channels != 2) throw Error("fno forward: in_channels must be 2 (value, coordinate)");
    require_all_finite(u0, "fno forward");
    const ParamLayout lay(c);
    if (p.count() != lay.total) throw Error("fno forward: parameter vector length mismatch");
    const double* P = p.data.data();
    const FourierTables& tab = fourier_tables(n, m);

    tape.config = c;
    tape.n = n;
    tape.feat.assign(static_cast<std::size_t>(n) * 2, 0.0);
    tape.v.resize(static_cast<std::size_t>(c.layers) + 1);
    tape.zpre.resize(static_cast<std::size_t>(c.layers));
    tape.vhat.resize(static_cast<std::size_t>(c.layers));
    for (auto& b : tape.v) b.assign(static_cast<std::size_t>(n) * w, 0.0);
    for (auto& b : tape.zpre) b.assign(static_cast<std::size_t>(n) * w, 0.0);
    for (auto& b : tape.vhat) b.assign(static_cast<std::size_t>(m) * w * 2, 0.0);
    tape.head1_pre.assign(static_cast<std::size_t>(n) * fc, 0.0);
    tape.head1_act.assign(static_cast<std::size_t>(n) * fc, 0.0);
    tape.out.assign(static_cast<std::size_t>(n) * c.out_channels, 0.0);

    for (int j = 0; j < n; ++j) {
        tape.feat[2 * j] = u0[j];
        tape.feat[2 * j + 1] = u0.grid.point(j);
    }

    // lift
    {
        const double* lw = P + lay.lift_w;
        const double* lb = P + lay.lift_b;
        double* v0 = tape.v[0].data();
        for (int j = 0; j < n; ++j) {
            const double f0 = tape.feat[2 * j], f1 = tape.feat[2 * j + 1];
            for (int cch = 0; cch < w; ++cch)
                v0[static_cast<std::size_t>(j) * w + cch] = lb[cch] + lw[2 * cch] * f0 + lw[2 * cch + 1] * f1;
        }
    }

    const double inv_n = 1.0 / n;
    std::vector<double> what(static_cast<std::size_t>(m) * w * 2);

    for (int l = 0; l < c.layers; ++l) {
        const double* vin = tape.v[l].data();
        double* vh = tape.vhat[l].data();
        double* z = tape.zpre[l].data();
        const double* R = P + lay.layer[l].spectral;
        const double* W = P + lay.layer[l].pointwise_w;
        const double* B = P + lay.layer[l].pointwise_b;

        // analysis: vh[k][c] = (1/n) sum_j vin[j][c] e^{-2pi i k j/n}
        for (int k = 0; k < m; ++k) {
            const double* ck = tab.cosT.data() + static_cast<std::size_t>(k) * n;
            const double* sk = tab.sinT.data() + static_cast<std::size_t>(k) * n;
            double* re = vh + static_cast<std::size_t>(k) * w * 2;
            double* im = re + w;
            for (int cch = 0; cch < w; ++cch) re[cch] = im[cch] = 0.0;
            for (int j = 0; j < n; ++j) {
                const double cj = ck[j], sj = sk[j];
                const double* row = vin + static_cast<std::size_t>(j) * w;
                for (int cch = 0; cch < w; ++cch) {
                    re[cch] += cj * row[cch];
                    im[cch] -= sj * row[cch];
                }
            }
            for (int cch = 0; cch < w; ++cch) {
                re[cch] *= inv_n;
                im[cch] *= inv_n;
            }
        }

        // mode-wise complex multiply: what[k] = R_k vh[k]
        for (int k = 0; k < m; ++k) {
            const double* re = vh + static_cast<std::size_t>(k) * w * 2;
            const double* im = re + w;
            double* ore = what.data() + static_cast<std::size_t>(k) * w * 2;
            double* oim = ore + w;
            const double* Rk = R + static_cast<std::size_t>(k) * w * w * 2;
            for (int o = 0; o < w; ++o) {
                const double* row = Rk + static_cast<std::size_t>(o) * w * 2;
                double ar = 0.0, ai = 0.0;
                for (int i = 0; i < w; ++i) {
                    const double rr = row[2 * i], ri = row[2 * i + 1];
                    ar += rr * re[i] - ri * im[i];
                    ai += rr * im[i] + ri * re[i];
                }
                ore[o] = ar;
                oim[o] = ai;
            }
        }

        // synthesis: z[j][c] = Re what[0][c] + 2 sum_{k>=1} (Re cos - Im sin)
        {
            const double* w0 = what.data();
            for (int j = 0; j < n; ++j) {
                double* zr = z + static_cast<std::size_t>(j) * w;
                for (int cch = 0; cch < w; ++cch) zr[cch] = w0[cch];
            }
            for (int k = 1; k < m; ++k) {
                const double* ck = tab.cosT.data() + static_cast<std::size_t>(k) * n;
                const double* sk = tab.sinT.data() + static_cast<std::size_t>(k) * n;
                const double* ore = what.data() + static_cast<std::size_t>(k) * w * 2;
                const double* oim = ore + w;
                for (int j = 0; j < n; ++j) {
                    const double cj = 2.0 * ck[j], sj = 2.0 * sk[j];
                    double* zr = z + static_cast<std::size_t>(j) * w;
                    for (int cch = 0; cch < w; ++cch) zr[cch] += cj * ore[cch] - sj * oim[cch];
                }
            }
        }

        // pointwise branch and bias
        for (int j = 0; j < n; ++j) {
            const double* row = vin + static_cast<std::size_t>(j) * w;
            double* zr = z + static_cast<std::size_t>(j) * w;
            for (int o = 0; o < w; ++o) {
                const double* wr = W + static_cast<std::size_t>(o) * w;
                double acc = B[o];
                for (int i = 0; i < w; ++i) acc += wr[i] * row[i];
                zr[o] += acc;
            }
        }

        // activation (skipped after the final Fourier layer)
        double* vout = tape.v[l + 1].data();
        if (l + 1 < c.layers) {
            for (std::size_t i = 0; i < tape.zpre[l].size(); ++i)
                vout[i] = act_eval(c.activation, z[i]);
        } else {
            for (std::size_t i = 0; i < tape.zpre[l].size(); ++i) vout[i] = z[i];
        }
        for (std::size_t i = 0; i < tape.zpre[l].size(); ++i)
            if (!std::isfinite(vout[i]))
                throw Error("fno forward: non-finite activation in layer " + std::to_string(l));
    }

    // heads
    {
        const double* vL = tape.v[static_cast<std::size_t>(c.layers)].data();
        const double* h1w = P + lay.head1_w;
        const double* h1b = P + lay.head1_b;
        for (int j = 0; j < n; ++j) {
            const double* row = vL + static_cast<std::size_t>(j) * w;
            double* pre = tape.head1_pre.data() + static_cast<std::size_t>(j) * fc;
            double* post = tape.head1_act.data() + static_cast<std::size_t>(j) * fc;
            for (int f = 0; f < fc; ++f) {
                const double* wr = h1w + static_cast<std::size_t>(f) * w;
                double acc = h1b[f];
                for (int i = 0; i < w; ++i) acc += wr[i] * row[i];
                pre[f] = acc;
                post[f] = act_eval(c.activation, acc);
            }
        }
        const double* h2w = P + lay.head2_w;
        const double* h2b = P + lay.head2_b;
        for (int j = 0; j < n; ++j) {
            const double* post = tape.head1_act.data() + static_cast<std::size_t>(j) * fc;
            for (int o = 0; o < c.out_channels; ++o) {
                const double* wr = h2w + static_cast<std::size_t>(o) * fc;
                double acc = h2b[o];
                for (int f = 0; f < fc; ++f) acc += wr[f] * post[f];
                tape.out[static_cast<std::size_t>(j) * c.out_channels + o] = acc;
            }
        }
    }
}

} // namespace detail

inline RealField forward_tape(const FnoParams& p, const RealField& u0, Tape& tape) {
    detail::forward_core(p, u0, tape);
    if (p.config.out_channels != 1)
        throw Error("fno forward: out_channels must be 1 for field output");
    RealField out(u0.grid);
    for (int j = 0; j < u0.grid.n; ++j) out[j] = tape.out[j];
    return out;
}

inline RealField forward(const FnoParams& p, const RealField& u0) {
    Tape tape;
    return forward_tape(p, u0, tape);
}

// Gradient of <cotangent, output> (plain Euclidean dot over grid points) with
// respect to every parameter; accumulates into grad, which must have
// param-count length. Loss-specific weights (quadrature h, batch means)
// belong in the cotangent.
inline void backward_accumulate(const FnoParams& p, const Tape& tape, const RealField& cotangent,
                                std::vector<double>& grad) {
    const FnoConfig& c = p.config;
    if (!(tape.config.modes == c.modes && tape.config.width == c.width &&
          tape.config.layers == c.layers && tape.config.fc_hidden == c.fc_hidden &&
          tape.config.in_channels == c.in_channels && tape.config.out_channels == c.out_channels))
        throw Error("fno backward: tape was recorded with a different config");
    const int n = tape.n;
    if (cotangent.grid.n != n) throw Error("fno backward: cotangent grid mismatch");
    const int w = c.width, m = c.modes, fc = c.fc_hidden;
    const ParamLayout lay(c);
    if (p.count() != lay.total || static_cast<std::int64_t>(grad.size()) != lay.total)
        throw Error("fno backward: parameter/gradient length mismatch");
    const double* P = p.data.data();
    double* G = grad.data();
    const detail::FourierTables& tab = detail::fourier_tables(n, m);
    const double inv_n = 1.0 / n;

    std::vector<double> d_h1act(static_cast<std::size_t>(n) * fc);
    std::vector<double> d_v(static_cast<std::size_t>(n) * w);
    std::vector<double> d_z(static_cast<std::size_t>(n) * w);
    std::vector<double> d_what(static_cast<std::size_t>(m) * w * 2);
    std::vector<double> d_vhat(static_cast<std::size_t>(m) * w * 2);

    // head2
    {
        const double* h2w = P + lay.head2_w;
        double* g_h2w = G + lay.head2_w;
        double* g_h2b = G + lay.head2_b;
        for (int j = 0; j < n; ++j) {
            const double g = cotangent[j];
            const double* post = tape.head1_act.data() + static_cast<std::size_t>(j) * fc;
            g_h2b[0] += g;
            for (int f = 0; f < fc; ++f) {
                g_h2w[f] += g * post[f];
                d_h1act[static_cast<std::size_t>(j) * fc + f] = g * h2w[f];
            }
        }
    }

    // head1 (activation between the two affine maps)
    {
        const double* h1w = P + lay.head1_w;
        double* g_h1w = G + lay.head1_w;
        double* g_h1b = G + lay.head1_b;
        const double* vL = tape.v[static_cast<std::size_t>(c.layers)].data();
        std::fill(d_v.begin(), d_v.end(), 0.0);
        for (int j = 0; j < n; ++j) {
            const double* pre = tape.head1_pre.data() + static_cast<std::size_t>(j) * fc;
            const double* row = vL + static_cast<std::size_t>(j) * w;
            double* dv = d_v.data() + static_cast<std::size_t>(j) * w;
            for (int f = 0; f < fc; ++f) {
                const double dpre = d_h1act[static_cast<std::size_t>(j) * fc + f] *
                                    detail::act_grad(c.activation, pre[f]);
                g_h1b[f] += dpre;
                const double* wr = h1w + static_cast<std::size_t>(f) * w;
                double* gw = g_h1w + static_cast<std::size_t>(f) * w;
                for (int i = 0; i < w; ++i) {
                    gw[i] += dpre * row[i];
                    dv[i] += dpre * wr[i];
                }
            }
        }
    }

    // Fourier layers, reverse order
    for (int l = c.layers - 1; l >= 0; --l) {
        const double* vin = tape.v[l].data();
        const double* vh = tape.vhat[l].data();
        const double* zpre = tape.zpre[l].data();
        const double* R = P + lay.layer[l].spectral;
        const double* W = P + lay.layer[l].pointwise_w;
        double* g_R = G + lay.layer[l].spectral;
        double* g_W = G + lay.layer[l].pointwise_w;
        double* g_B = G + lay.layer[l].pointwise_b;

        // through the activation into d_z
        if (l + 1 < c.layers) {
            for (std::size_t i = 0; i < d_v.size(); ++i)
                d_z[i] = d_v[i] * detail::act_grad(c.activation, zpre[i]);
        } else {
            d_z = d_v;
        }

        // pointwise branch
        std::fill(d_v.begin(), d_v.end(), 0.0);
        for (int j = 0; j < n; ++j) {
            const double* row = vin + static_cast<std::size_t>(j) * w;
            const double* dz = d_z.data() + static_cast<std::size_t>(j) * w;
            double* dv = d_v.data() + static_cast<std::size_t>(j) * w;
            for (int o = 0; o < w; ++o) {
                const double g = dz[o];
                g_B[o] += g;
                const double* wr = W + static_cast<std::size_t>(o) * w;
                double* gw = g_W + static_cast<std::size_t>(o) * w;
                for (int i = 0; i < w; ++i) {
                    gw[i] += g * row[i];
                    dv[i] += g * wr[i];
                }
            }
        }

        // adjoint of synthesis: d_what[k][c] from d_z
        for (int k = 0; k < m; ++k) {
            const double* ck = tab.cosT.data() + static_cast<std::size_t>(k) * n;
            const double* sk = tab.sinT.data() + static_cast<std::size_t>(k) * n;
            double* re = d_what.data() + static_cast<std::size_t>(k) * w * 2;
            double* im = re + w;
            for (int cch = 0; cch < w; ++cch) re[cch] = im[cch] = 0.0;
            const double wk = (k == 0) ? 1.0 : 2.0;
            for (int j = 0; j < n; ++j) {
                const double cj = wk * ck[j], sj = wk * sk[j];
                const double* dz = d_z.data() + static_cast<std::size_t>(j) * w;
                for (int cch = 0; cch < w; ++cch) {
                    re[cch] += cj * dz[cch];
                    im[cch] -= sj * dz[cch];
                }
            }
            if (k == 0)
                for (int cch = 0; cch < w; ++cch) im[cch] = 0.0; // Im of bin 0 never reaches output
        }

        // adjoint of the mode-wise multiply: d_vhat = R^H d_what, grad R = d_what (conj vhat)^T
        for (int k = 0; k < m; ++k) {
            const double* dre = d_what.data() + static_cast<std::size_t>(k) * w * 2;
            const double* dim = dre + w;
            const double* ire = vh + static_cast<std::size_t>(k) * w * 2;
            const double* iim = ire + w;
            double* ore = d_vhat.data() + static_cast<std::size_t>(k) * w * 2;
            double* oim = ore + w;
            const double* Rk = R + static_cast<std::size_t>(k) * w * w * 2;
            double* Gk = g_R + static_cast<std::size_t>(k) * w * w * 2;
            for (int i = 0; i < w; ++i) ore[i] = oim[i] = 0.0;
            for (int o = 0; o < w; ++o) {
                const double gr = dre[o], gi = dim[o];
                const double* row = Rk + static_cast<std::size_t>(o) * w * 2;
                double* grow = Gk + static_cast<std::size_t>(o) * w * 2;
                for (int i = 0; i < w; ++i) {
                    // grad of complex weight: d_what[o] * conj(vhat[i])
                    grow[2 * i] += gr * ire[i] + gi * iim[i];
                    grow[2 * i + 1] += gi * ire[i] - gr * iim[i];
                    // cotangent of vhat[i]: conj(R[o][i]) * d_what[o]
                    const double rr = row[2 * i], ri = row[2 * i + 1];
                    ore[i] += rr * gr + ri * gi;
                    oim[i] += rr * gi - ri * gr;
                }
            }
        }

        // adjoint of analysis, accumulated on top of the pointwise-branch term
        for (int k = 0; k < m; ++k) {
            const double* ck = tab.cosT.data() + static_cast<std::size_t>(k) * n;
            const double* sk = tab.sinT.data() + static_cast<std::size_t>(k) * n;
            const double* re = d_vhat.data() + static_cast<std::size_t>(k) * w * 2;
            const double* im = re + w;
            for (int j = 0; j < n; ++j) {
                const double cj = inv_n * ck[j], sj = inv_n * sk[j];
                double* dv = d_v.data() + static_cast<std::size_t>(j) * w;
                for (int cch = 0; cch < w; ++cch) dv[cch] += cj * re[cch] - sj * im[cch];
            }
        }
    }

    // lift
    {
        double* g_lw = G + lay.lift_w;
        double* g_lb = G + lay.lift_b;
        for (int j = 0; j < n; ++j) {
            const double f0 = tape.feat[2 * j], f1 = tape.feat[2 * j + 1];
            const double* dv = d_v.data() + static_cast<std::size_t>(j) * w;
            for (int cch = 0; cch < w; ++cch) {
                g_lb[cch] += dv[cch];
                g_lw[2 * cch] += dv[cch] * f0;
                g_lw[2 * cch + 1] += dv[cch] * f1;
            }
        }
    }
}

inline std::vector<double> backward(const FnoParams& p, const Tape& tape,
                                    const RealField& cotangent) {
    std::vector<double> grad(p.data.size(), 0.0);
    backward_accumulate(p, tape, cotangent, grad);
    return grad;
}

// Worst relative disagreement between backward() and central finite
// differences of J = <cot, forward(params, u0)>, over all biases plus a fixed
// random subset of at least 200 parameters.
inline double gradient_check(const FnoConfig& cfg, std::uint64_t seed, int n, double eps) {
    const PeriodicGrid grid(n);
    FnoParams params = init_params(cfg, seed);
    KeyedRng rng(seed, "gradcheck", 0);
    RealField u0(grid), cot(grid);
    for (int i = 0; i < n; ++i) {
        u0[i] = rng.uniform(-0.3, 0.3);
        cot[i] = rng.uniform(-1.0, 1.0);
    }
    Tape tape;
    forward_tape(params, u0, tape);
    const std::vector<double> g = backward(params, tape, cot);

    const ParamLayout lay(cfg);
    std::vector<std::int64_t> subset;
    auto push_range = [&](std::int64_t off, std::int64_t count) {
        for (std::int64_t i = 0; i < count; ++i) subset.push_back(off + i);
    };
    push_range(lay.lift_b, cfg.width);
    for (int l = 0; l < cfg.layers; ++l) push_range(lay.layer[l].pointwise_b, cfg.width);
    push_range(lay.head1_b, cfg.fc_hidden);
    push_range(lay.head2_b, cfg.out_channels);
    KeyedRng pick(seed, "gradcheck-subset", 0);
    const auto total = static_cast<std::uint64_t>(lay.total);
    for (int i = 0; i < 200; ++i)
        subset.push_back(static_cast<std::int64_t>(pick.next_u64() % total));

    auto eval_j = [&](const FnoParams& q) {
        Tape t;
        const RealField out = forward_tape(q, u0, t);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += cot[i] * out[i];
        return acc;
    };

    double worst = 0.0;
    FnoParams probe = params;
    for (const std::int64_t idx : subset) {
        const double keep = probe.data[static_cast<std::size_t>(idx)];
        probe.data[static_cast<std::size_t>(idx)] = keep + eps;
        const double jp = eval_j(probe);
        probe.data[static_cast<std::size_t>(idx)] = keep - eps;
        const double jm = eval_j(probe);
        probe.data[static_cast<std::size_t>(idx)] = keep;
        const double fd = (jp - jm) / (2.0 * eps);
        const double an = g[static_cast<std::size_t>(idx)];
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-12});
        worst = std::max(worst, std::abs(fd - an) / denom);
    }
    return worst;
}

inline void save_checkpoint(const std::string& path, const FnoParams& p, int epoch, double loss) {
    nlohmann::json meta;
    meta["config"] = p.config;
    meta["epoch"] = epoch;
    meta["loss"] = loss;
    io::Array arr{"params", {p.count()}, p.data};
    io::write_container(path, "fno-checkpoint", meta, {arr});
}

inline FnoParams load_checkpoint(const std::string& path, int* epoch = nullptr,
                                 double* loss = nullptr) {
    const io::Container c = io::read_container(path, "fno-checkpoint");
    FnoParams p;
    p.config = c.meta.at("config").get<FnoConfig>();
    p.data = c.find("params").data;
    if (p.count() != param_count(p.config))
        throw io::MalformedFile(path + ": parameter count does not match config");
    if (epoch) *epoch = c.meta.at("epoch").get<int>();
    if (loss) *loss = c.meta.at("loss").get<double>();
    return p;
}

} // namespace fnolab
