#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "pinnse/adam.hpp"
#include "pinnse/errors.hpp"
#include "pinnse/loss.hpp"
#include "pinnse/mlp.hpp"
#include "pinnse/rng.hpp"

namespace pinnse::nn {

struct TrainData {
    Matrix X, T; // normalized inputs and targets, rows are samples
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int max_epochs = 100;
    int patience = 20;
    std::uint64_t seed = 1;
    loss::LossWeights weights;

    void validate() const {
        if (learning_rate < 1e-5 || learning_rate > 1e-1)
            throw training_error("learning rate out of range");
        if (batch_size < 4 || batch_size > 128) throw training_error("batch size out of range");
        if (max_epochs < 1) throw training_error("max_epochs must be >= 1");
        if (patience < 1) throw training_error("patience must be >= 1");
        weights.validate();
    }
};

struct TrainReport {
    std::vector<loss::LossTerms> epoch_losses; // full-pass training loss per epoch
    std::vector<double> epoch_val_mae;         // normalized-space validation MAE
    int best_epoch = 0;                        // 1-based
    double wall_time_s = 0.0;
    double inference_time_s = 0.0; // per sample

    int epochs_run() const { return static_cast<int>(epoch_val_mae.size()); }
};

struct TrainResult {
    MlpModel model; // best-epoch snapshot
    TrainReport report;
};

// Early stopping: give up once `patience` epochs pass without improvement.
inline bool should_stop(int epoch, int best_epoch, int patience) {
    return epoch - best_epoch >= patience;
}

namespace detail {

// Fisher-Yates on pinned uniforms; std::shuffle's draws are not portable.
inline void shuffle_indices(std::vector<int>& idx, std::mt19937_64& eng) {
    for (size_t i = idx.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(uniform01(eng) * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(idx[i - 1], idx[j]);
    }
}

inline double mean_abs_error(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw contract_error("mae: shape mismatch");
    double s = 0.0;
    for (size_t k = 0; k < a.a.size(); ++k) s += std::abs(a.a[k] - b.a[k]);
    return s / static_cast<double>(a.a.size());
}

} // namespace detail

inline TrainResult train(const MlpModel& init, const TrainData& tr, const TrainData& val,
                         const TrainConfig& cfg, const loss::PhysicsContext& ctx,
                         const loss::ConstantsSpec& cs) {
    cfg.validate();
    if (tr.X.rows == 0 || val.X.rows == 0) throw contract_error("train: empty dataset");
    if (tr.X.rows != tr.T.rows || val.X.rows != val.T.rows)
        throw contract_error("train: input and target row counts differ");
    if (tr.X.cols != init.in_dim() || tr.T.cols != init.out_dim())
        throw contract_error("train: data width does not match model");

    const auto t0 = std::chrono::steady_clock::now();
    MlpModel model = init;
    AdamState opt = AdamState::for_model(model);
    const int n_train = tr.X.rows;
    const int bs = std::min(cfg.batch_size, n_train);

    std::vector<int> order(static_cast<size_t>(n_train));
    std::iota(order.begin(), order.end(), 0);

    TrainResult out;
    out.model = model;
    double best_mae = std::numeric_limits<double>::infinity();
    ForwardCache cache;
    Matrix xb, tb, du;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        auto eng = make_engine(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch));
        detail::shuffle_indices(order, eng);

        for (int start = 0; start < n_train; start += bs) {
            const int rows = std::min(bs, n_train - start);
            xb = Matrix(rows, tr.X.cols);
            tb = Matrix(rows, tr.T.cols);
            for (int r = 0; r < rows; ++r) {
                const int src = order[static_cast<size_t>(start + r)];
                std::copy(tr.X.row(src), tr.X.row(src) + tr.X.cols, xb.row(r));
                std::copy(tr.T.row(src), tr.T.row(src) + tr.T.cols, tb.row(r));
            }
            forward(model, xb, cache);
            loss::evaluate_loss(cache.acts.back(), tb, cfg.weights, ctx, cs, &du);
            Gradients g = backward(model, cache, du);
            adam_step(model, g, opt, cfg.learning_rate);
        }

        forward(model, tr.X, cache);
        out.report.epoch_losses.push_back(
            loss::evaluate_loss(cache.acts.back(), tr.T, cfg.weights, ctx, cs));

        forward(model, val.X, cache);
        double val_mae = detail::mean_abs_error(cache.acts.back(), val.T);
        out.report.epoch_val_mae.push_back(val_mae);

        if (val_mae < best_mae) {
            best_mae = val_mae;
            out.report.best_epoch = epoch;
            out.model = model;
        }
        if (should_stop(epoch, out.report.best_epoch, cfg.patience)) break;
    }

    out.report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // per-sample latency of the returned model, amortized over repeats
    {
        Matrix one(1, val.X.cols);
        std::copy(val.X.row(0), val.X.row(0) + val.X.cols, one.row(0));
        const int reps = 200;
        const auto i0 = std::chrono::steady_clock::now();
        for (int k = 0; k < reps; ++k) forward(out.model, one, cache);
        out.report.inference_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - i0).count() / reps;
    }
    return out;
}

} // namespace pinnse::nn
