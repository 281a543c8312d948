#pragma once

// H1 training: discrete Sobolev loss with its exact cotangent, Adam, and a
// deterministic mini-batch loop with per-epoch train/test evaluation,
// best-epoch tracking and optional checkpointing.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fnolab/datagen.hpp"
#include "fnolab/fno.hpp"
#include "fnolab/io.hpp"
#include "fnolab/spectral.hpp"

namespace fnolab {

struct TrainConfig {
    int epochs = 100;
    double lr = 1e-3;
    int batch_size = 16;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
    std::uint64_t seed = 0;
    int checkpoint_every = 0; // 0: only best + final

    void validate(int n_train) const {
        if (epochs < 1) throw Error("TrainConfig: epochs must be >= 1");
        if (!(lr >= 0.0)) throw Error("TrainConfig: lr must be non-negative");
        if (batch_size < 1 || batch_size > n_train)
            throw Error("TrainConfig: need 1 <= batch_size <= n_train");
    }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = {{"epochs", c.epochs},   {"lr", c.lr},           {"batch_size", c.batch_size},
         {"beta1", c.beta1},     {"beta2", c.beta2},     {"eps_adam", c.eps_adam},
         {"seed", c.seed},       {"checkpoint_every", c.checkpoint_every}};
}
inline void from_json(const nlohmann::json& j, TrainConfig& c) {
    j.at("epochs").get_to(c.epochs);
    j.at("lr").get_to(c.lr);
    j.at("batch_size").get_to(c.batch_size);
    j.at("beta1").get_to(c.beta1);
    j.at("beta2").get_to(c.beta2);
    j.at("eps_adam").get_to(c.eps_adam);
    j.at("seed").get_to(c.seed);
    j.at("checkpoint_every").get_to(c.checkpoint_every);
}

// mean over the batch of || pred - target ||^2 in the discrete H1 norm
inline double h1_loss(std::span<const RealField> pred, std::span<const RealField> target) {
    if (pred.size() != target.size() || pred.empty())
        throw Error("h1_loss: batch shape mismatch");
    double acc = 0.0;
    for (std::size_t b = 0; b < pred.size(); ++b) {
        if (!(pred[b].grid == target[b].grid)) throw Error("h1_loss: grid mismatch");
        acc += h1_fd_norm_sq(pred[b] - target[b]);
    }
    return acc / static_cast<double>(pred.size());
}

// d h1_loss / d pred for one batch member: with e = pred - target and
// d = central difference of e, the derivative of h sum e^2 + h sum (De)^2 is
// 2 h e_j + (d_{j-1} - d_{j+1}), then divided by the batch size.
inline RealField h1_sample_cotangent(const RealField& pred, const RealField& target,
                                     std::size_t batch_size) {
    const int n = pred.grid.n;
    const double h = pred.grid.spacing();
    const RealField e = pred - target;
    const RealField d = fd_gradient(e);
    RealField cot(pred.grid);
    const double inv_b = 1.0 / static_cast<double>(batch_size);
    for (int j = 0; j < n; ++j) {
        const int jm = (j + n - 1) % n;
        const int jp = (j + 1) % n;
        cot[j] = (2.0 * h * e[j] + d[jm] - d[jp]) * inv_b;
    }
    return cot;
}

inline std::vector<RealField> h1_loss_gradient(std::span<const RealField> pred,
                                               std::span<const RealField> target) {
    if (pred.size() != target.size() || pred.empty())
        throw Error("h1_loss_gradient: batch shape mismatch");
    std::vector<RealField> out;
    out.reserve(pred.size());
    for (std::size_t b = 0; b < pred.size(); ++b)
        out.push_back(h1_sample_cotangent(pred[b], target[b], pred.size()));
    return out;
}

struct AdamState {
    std::vector<double> m, v;
    std::int64_t t = 0;

    explicit AdamState(std::size_t count) : m(count, 0.0), v(count, 0.0) {}
};

inline void adam_step(std::vector<double>& params, const std::vector<double>& grads,
                      AdamState& state, const TrainConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw Error("adam_step: layout mismatch");
    for (double g : grads)
        if (!std::isfinite(g)) throw Error("adam_step: non-finite gradient entry");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps_adam);
    }
}

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double test_loss = 0.0;
    double test_rel_h1 = 0.0;
    double wall_seconds = 0.0; // informational; excluded from persisted CSV
    bool instability_flag = false;
};

struct LearningCurve {
    std::vector<EpochRecord> records;
    int best_epoch = 0;
    double best_test_loss = 0.0;
    bool aborted = false;
    std::string abort_reason;
};

struct EvalResult {
    double mean_loss = 0.0;
    double rel_h1 = 0.0;
    std::vector<double> per_sample; // H1 error per sample
};

inline EvalResult evaluate(const FnoParams& params, std::span<const SamplePair> split) {
    if (split.empty()) throw Error("evaluate: empty split");
    EvalResult r;
    r.per_sample.reserve(split.size());
    double num = 0.0, den = 0.0;
    for (const auto& s : split) {
        const RealField pred = forward(params, s.u0);
        const double dsq = h1_fd_norm_sq(pred - s.uT);
        const double tsq = h1_fd_norm_sq(s.uT);
        num += dsq;
        den += tsq;
        r.mean_loss += dsq;
        r.per_sample.push_back(std::sqrt(dsq));
    }
    r.mean_loss /= static_cast<double>(split.size());
    r.rel_h1 = std::sqrt(num / den);
    return r;
}

struct TrainResult {
    FnoParams final_params;
    FnoParams best_params;
    LearningCurve curve;
};

inline TrainResult train(const Dataset& data, const FnoConfig& fno_cfg, const TrainConfig& cfg,
                         const std::string& checkpoint_dir = "") {
    fno_cfg.validate();
    cfg.validate(static_cast<int>(data.train.size()));
    if (fno_cfg.modes > data.grid.n / 2)
        throw Error("train: modes exceed the dataset grid Nyquist wavenumber");
    if (data.test.empty()) throw Error("train: need a non-empty test split");

    FnoParams params = init_params(fno_cfg, cfg.seed);
    AdamState adam(params.data.size());
    std::vector<double> grad(params.data.size(), 0.0);
    Tape tape;

    TrainResult result{params, params, {}};
    LearningCurve& curve = result.curve;
    double prev_test = 0.0;
    bool have_best = false;

    const auto n_train = data.train.size();
    std::vector<std::size_t> order(n_train);
    const auto t_start = std::chrono::steady_clock::now();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        // seeded Fisher-Yates shuffle, independent of all other streams
        for (std::size_t i = 0; i < n_train; ++i) order[i] = i;
        KeyedRng shuffle(cfg.seed, "epoch-shuffle", static_cast<std::uint64_t>(epoch));
        for (std::size_t i = n_train - 1; i > 0; --i)
            std::swap(order[i], order[shuffle.next_u64() % (i + 1)]);

        bool epoch_ok = true;
        for (std::size_t start = 0; start < n_train && epoch_ok; start += cfg.batch_size) {
            const std::size_t bsz = std::min<std::size_t>(cfg.batch_size, n_train - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t b = 0; b < bsz; ++b) {
                const SamplePair& s = data.train[order[start + b]];
                const RealField pred = forward_tape(params, s.u0, tape);
                batch_loss += h1_fd_norm_sq(pred - s.uT);
                const RealField cot = h1_sample_cotangent(pred, s.uT, bsz);
                backward_accumulate(params, tape, cot, grad);
            }
            batch_loss /= static_cast<double>(bsz);
            if (!std::isfinite(batch_loss)) {
                curve.aborted = true;
                curve.abort_reason = "non-finite loss at epoch " + std::to_string(epoch);
                epoch_ok = false;
                break;
            }
            try {
                adam_step(params.data, grad, adam, cfg);
            } catch (const Error& e) {
                curve.aborted = true;
                curve.abort_reason =
                    "epoch " + std::to_string(epoch) + " aborted: " + e.what();
                epoch_ok = false;
            }
        }
        if (!epoch_ok) break;

        EpochRecord rec;
        rec.epoch = epoch;
        double train_acc = 0.0;
        for (const auto& s : data.train) {
            const RealField pred = forward(params, s.u0);
            train_acc += h1_fd_norm_sq(pred - s.uT);
        }
        rec.train_loss = train_acc / static_cast<double>(n_train);
        const EvalResult ev = evaluate(params, data.test);
        rec.test_loss = ev.mean_loss;
        rec.test_rel_h1 = ev.rel_h1;
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.test_loss)) {
            curve.aborted = true;
            curve.abort_reason = "non-finite evaluation loss at epoch " + std::to_string(epoch);
            break;
        }
        rec.instability_flag = epoch > 1 && rec.test_loss > 10.0 * prev_test;
        prev_test = rec.test_loss;
        curve.records.push_back(rec);

        if (!have_best || rec.test_loss < curve.best_test_loss) {
            have_best = true;
            curve.best_test_loss = rec.test_loss;
            curve.best_epoch = epoch;
            result.best_params = params;
        }
        if (!checkpoint_dir.empty() && cfg.checkpoint_every > 0 &&
            epoch % cfg.checkpoint_every == 0) {
            char name[32];
            std::snprintf(name, sizeof name, "epoch_%05d.fno", epoch);
            save_checkpoint(checkpoint_dir + "/" + name, params, epoch, rec.test_loss);
        }
    }

    result.final_params = params;
    if (!have_best) {
        result.best_params = params;
        curve.best_epoch = curve.records.empty() ? 0 : curve.records.back().epoch;
        curve.best_test_loss =
            curve.records.empty() ? std::nan("") : curve.records.back().test_loss;
    }
    if (!checkpoint_dir.empty()) {
        save_checkpoint(checkpoint_dir + "/final.fno", result.final_params,
                        curve.records.empty() ? 0 : curve.records.back().epoch,
                        curve.records.empty() ? 0.0 : curve.records.back().test_loss);
        save_checkpoint(checkpoint_dir + "/best.fno", result.best_params, curve.best_epoch,
                        curve.best_test_loss);
    }
    return result;
}

inline std::string curve_to_csv(const LearningCurve& c) {
    std::ostringstream os;
    os << "epoch,train_loss,test_loss,rel_err,flag\n";
    for (const auto& r : c.records)
        os << r.epoch << ',' << io::fmt_double(r.train_loss) << ',' << io::fmt_double(r.test_loss)
           << ',' << io::fmt_double(r.test_rel_h1) << ',' << (r.instability_flag ? 1 : 0) << '\n';
    if (c.aborted) os << "# aborted: " << c.abort_reason << '\n';
    return os.str();
}

inline void save_curve_csv(const LearningCurve& c, const std::string& path) {
    io::write_text_file(path, curve_to_csv(c));
}

inline LearningCurve load_curve_csv(const std::string& path) {
    std::istringstream in(io::read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || line.rfind("epoch,", 0) != 0)
        throw io::MalformedFile(path + ": not a learning-curve CSV");
    LearningCurve c;
    bool have_best = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            c.aborted = true;
            const auto pos = line.find(':');
            if (pos != std::string::npos) c.abort_reason = line.substr(pos + 2);
            continue;
        }
        EpochRecord r;
        int flag = 0;
        std::istringstream ls(line);
        char comma;
        ls >> r.epoch >> comma >> r.train_loss >> comma >> r.test_loss >> comma >> r.test_rel_h1 >>
            comma >> flag;
        if (!ls) throw io::MalformedFile(path + ": bad row '" + line + "'");
        r.instability_flag = flag != 0;
        c.records.push_back(r);
        if (!have_best || r.test_loss < c.best_test_loss) {
            have_best = true;
            c.best_test_loss = r.test_loss;
            c.best_epoch = r.epoch;
        }
    }
    return c;
}

// Columnar data for qualitative plots: value and spectral-derivative curves
// of the truth and the prediction on one sample.
inline void export_qualitative(const FnoParams& params, const SamplePair& sample,
                               const std::string& path) {
    const RealField pred = forward(params, sample.u0);
    const RealField du_true =
        inverse_transform(spectral_derivative(forward_transform(sample.uT), 1));
    const RealField du_pred = inverse_transform(spectral_derivative(forward_transform(pred), 1));
    std::ostringstream os;
    os << "x,u0,u_true,u_pred,du_true,du_pred\n";
    const PeriodicGrid g = sample.u0.grid;
    for (int i = 0; i < g.n; ++i)
        os << io::fmt_double(g.point(i)) << ',' << io::fmt_double(sample.u0[i]) << ','
           << io::fmt_double(sample.uT[i]) << ',' << io::fmt_double(pred[i]) << ','
           << io::fmt_double(du_true[i]) << ',' << io::fmt_double(du_pred[i]) << '\n';
    io::write_text_file(path, os.str());
}

} // namespace fnolab
