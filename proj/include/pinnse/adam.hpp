#pragma once

#include <cmath>
#include <vector>

#include "pinnse/errors.hpp"
#include "pinnse/mlp.hpp"

namespace pinnse::nn {

// Standard Adam with bias-corrected moments.
struct AdamState {
    std::vector<Matrix> mw, vw;
    std::vector<std::vector<double>> mb, vb;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState for_model(const MlpModel& model) {
        AdamState s;
        for (int l = 0; l < model.n_layers(); ++l) {
            const Matrix& w = model.weights[static_cast<size_t>(l)];
            s.mw.emplace_back(w.rows, w.cols);
            s.vw.emplace_back(w.rows, w.cols);
            s.mb.emplace_back(model.biases[static_cast<size_t>(l)].size(), 0.0);
            s.vb.emplace_back(model.biases[static_cast<size_t>(l)].size(), 0.0);
        }
        return s;
    }
};

namespace detail {
inline void adam_update(double* theta, double* m, double* v, const double* g, size_t n,
                        double lr, double b1, double b2, double eps, double bc1, double bc2) {
    for (size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}
} // namespace detail

inline void adam_step(MlpModel& model, const Gradients& g, AdamState& s, double lr) {
    if (static_cast<int>(s.mw.size()) != model.n_layers())
        throw contract_error("optimizer state does not match model");
    s.t += 1;
    const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
    const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
    for (int l = 0; l < model.n_layers(); ++l) {
        auto& w = model.weights[static_cast<size_t>(l)];
        detail::adam_update(w.a.data(), s.mw[static_cast<size_t>(l)].a.data(),
                            s.vw[static_cast<size_t>(l)].a.data(),
                            g.dw[static_cast<size_t>(l)].a.data(), w.a.size(), lr, s.beta1,
                            s.beta2, s.eps, bc1, bc2);
        auto& b = model.biases[static_cast<size_t>(l)];
        detail::adam_update(b.data(), s.mb[static_cast<size_t>(l)].data(),
                            s.vb[static_cast<size_t>(l)].data(),
                            g.db[static_cast<size_t>(l)].data(), b.size(), lr, s.beta1, s.beta2,
                            s.eps, bc1, bc2);
    }
}

} // namespace pinnse::nn
