#pragma once

#include <chrono>
#include <cmath>
#include <vector>

#include "pinnse/attack.hpp"
#include "pinnse/dataset.hpp"
#include "pinnse/errors.hpp"
#include "pinnse/mlp.hpp"
#include "pinnse/preprocess.hpp"

namespace pinnse::bench {

struct MaeReport {
    std::vector<double> per_test_point_mae;
    double mean_mae = 0.0;           // mean of per_test_point_mae
    std::vector<double> per_bus_mae; // same error, sliced by bus
    bool has_attacked_bus = false;
    double attacked_bus_mae = 0.0; // set only when the scenario carries an attack
    double mean_mae_norm = 0.0;    // normalized-space MAE, logged for HPO parity
    double training_time_s = 0.0;
    double inference_time_ms = 0.0;
    double inference_std_ms = 0.0;
};

// De-normalizes predictions and reports MAE in physical units: |dvm| in p.u.
// and |dva| in rad, averaged over the stacked 2N error vector per test point.
inline MaeReport evaluate(const nn::MlpModel& model, const forge::Dataset& test_ds,
                          const forge::NormMeta& meta,
                          const forge::AttackSpec* attack = nullptr) {
    const int n = test_ds.n_bus;
    if (meta.n_bus != n) throw contract_error("evaluate: meta built for a different case");
    if (model.in_dim() != 2 * n || model.out_dim() != 2 * n)
        throw contract_error("evaluate: model width does not match case");
    if (test_ds.samples.empty()) throw contract_error("evaluate: empty test set");

    Matrix x, t;
    forge::apply_norm(meta, test_ds, x, t);
    Matrix u = nn::forward(model, x);

    MaeReport rep;
    rep.per_test_point_mae.reserve(test_ds.samples.size());
    rep.per_bus_mae.assign(static_cast<size_t>(n), 0.0);
    double norm_sum = 0.0;
    std::vector<double> vm, va;
    for (int r = 0; r < u.rows; ++r) {
        forge::invert_targets(meta, u.row(r), vm, va);
        const forge::Sample& truth = test_ds.samples[static_cast<size_t>(r)];
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const size_t si = static_cast<size_t>(i);
            const double evm = std::abs(vm[si] - truth.vm[si]);
            const double eva = std::abs(va[si] - truth.va[si]);
            acc += evm + eva;
            rep.per_bus_mae[si] += 0.5 * (evm + eva);
        }
        rep.per_test_point_mae.push_back(acc / (2.0 * n));
        for (int c = 0; c < u.cols; ++c) norm_sum += std::abs(u(r, c) - t(r, c));
    }
    const double pts = static_cast<double>(rep.per_test_point_mae.size());
    for (double v : rep.per_test_point_mae) rep.mean_mae += v;
    rep.mean_mae /= pts;
    for (double& v : rep.per_bus_mae) v /= pts;
    rep.mean_mae_norm = norm_sum / (pts * 2.0 * n);

    if (attack != nullptr) {
        if (attack->target_bus < 1 || attack->target_bus > n)
            throw contract_error("evaluate: attacked bus outside case");
        rep.has_attacked_bus = true;
        rep.attacked_bus_mae = rep.per_bus_mae[static_cast<size_t>(attack->target_bus - 1)];
    }
    return rep;
}

struct CostReport {
    double training_time_s = 0.0;
    double inference_mean_ms = 0.0;
    double inference_std_ms = 0.0;
    int repeats = 0;
};

// Per-sample latency over `repeats` single-row forward passes. Each pass is
// timed individually so a spread can be reported alongside the mean.
inline CostReport measure_costs(const nn::MlpModel& model, const Matrix& probe, int repeats,
                                double training_time_s) {
    if (probe.rows < 1 || probe.cols != model.in_dim())
        throw contract_error("measure_costs: probe row does not match model");
    if (repeats < 1) throw contract_error("measure_costs: repeats must be >= 1");

    Matrix one(1, probe.cols);
    std::copy(probe.row(0), probe.row(0) + probe.cols, one.row(0));
    nn::ForwardCache cache;
    nn::forward(model, one, cache); // warm-up, excluded

    std::vector<double> ms(static_cast<size_t>(repeats));
    for (int k = 0; k < repeats; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        nn::forward(model, one, cache);
        const auto t1 = std::chrono::steady_clock::now();
        ms[static_cast<size_t>(k)] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    CostReport rep;
    rep.repeats = repeats;
    rep.training_time_s = training_time_s;
    double sum = 0.0;
    for (double v : ms) sum += v;
    rep.inference_mean_ms = sum / repeats;
    double varacc = 0.0;
    for (double v : ms) varacc += (v - rep.inference_mean_ms) * (v - rep.inference_mean_ms);
    rep.inference_std_ms = std::sqrt(varacc / repeats);
    if (rep.inference_mean_ms <= 0.0) rep.inference_mean_ms = 1e-6; // clock floor
    return rep;
}

} // namespace pinnse::bench
