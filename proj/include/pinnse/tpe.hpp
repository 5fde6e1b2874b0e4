#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "pinnse/errors.hpp"
#include "pinnse/rng.hpp"

namespace pinnse::hpo {

// Hard sampling bounds. Tighter sub-ranges are fine; anything wider is a
// configuration mistake, not an exploration choice.
struct ParamRanges {
    int layers_lo = 2, layers_hi = 10;
    int neurons_lo = 64, neurons_hi = 4096;
    double lr_lo = 1e-5, lr_hi = 1e-1;
    int batch_lo = 4, batch_hi = 128;

    void validate() const {
        auto ordered = [](double lo, double hi) { return lo < hi; };
        if (!ordered(layers_lo, layers_hi) || !ordered(neurons_lo, neurons_hi) ||
            !ordered(lr_lo, lr_hi) || !ordered(batch_lo, batch_hi))
            throw contract_error("param range: lower bound must be below upper");
        if (layers_lo < 2 || layers_hi > 10) throw contract_error("layers range outside [2,10]");
        if (neurons_lo < 64 || neurons_hi > 4096)
            throw contract_error("neurons range outside [64,4096]");
        if (lr_lo < 1e-5 || lr_hi > 1e-1)
            throw contract_error("learning rate range outside [1e-5,1e-1]");
        if (batch_lo < 4 || batch_hi > 128) throw contract_error("batch range outside [4,128]");
    }
};

struct TrialParams {
    int layers = 2; // hidden layers
    int neurons = 64;
    double lr = 1e-3;
    int batch = 32;

    bool operator==(const TrialParams&) const = default;
};

// What the sampler needs to know about a finished trial.
struct TpeObservation {
    TrialParams params;
    double mae = 0.0;
};

inline constexpr int kTpeStartup = 5;
inline constexpr int kTpeCandidates = 24;
inline constexpr double kTpeGamma = 0.25;

namespace detail {

// Search happens in a transformed space: layer count stays linear, the other
// three dimensions move to log domain.
struct TpeDim {
    double lo = 0.0, hi = 0.0;
    bool log_domain = false;
};

inline std::array<TpeDim, 4> tpe_dims(const ParamRanges& r) {
    return {{{static_cast<double>(r.layers_lo), static_cast<double>(r.layers_hi), false},
             {std::log(static_cast<double>(r.neurons_lo)),
              std::log(static_cast<double>(r.neurons_hi)), true},
             {std::log(r.lr_lo), std::log(r.lr_hi), true},
             {std::log(static_cast<double>(r.batch_lo)), std::log(static_cast<double>(r.batch_hi)),
              true}}};
}

inline std::array<double, 4> to_tpe_space(const TrialParams& p) {
    return {static_cast<double>(p.layers), std::log(static_cast<double>(p.neurons)),
            std::log(p.lr), std::log(static_cast<double>(p.batch))};
}

inline int round_into(double x, int lo, int hi) {
    int v = static_cast<int>(std::llround(x));
    return std::clamp(v, lo, hi);
}

inline TrialParams from_tpe_space(const std::array<double, 4>& x, const ParamRanges& r) {
    TrialParams p;
    p.layers = round_into(x[0], r.layers_lo, r.layers_hi);
    p.neurons = round_into(std::exp(x[1]), r.neurons_lo, r.neurons_hi);
    p.lr = std::clamp(std::exp(x[2]), r.lr_lo, r.lr_hi);
    p.batch = round_into(std::exp(x[3]), r.batch_lo, r.batch_hi);
    return p;
}

// 1-D Parzen estimator: Gaussians at the observed points (Scott bandwidth,
// floored so degenerate clusters keep a usable kernel) plus one wide prior
// component spanning the whole range, which keeps exploration alive no
// matter how tight the observations cluster.
struct Kde {
    std::vector<double> centers;
    double bw = 1.0;
    double mid = 0.0, span = 1.0;

    Kde(std::vector<double> v, double lo, double hi)
        : centers(std::move(v)), mid(0.5 * (lo + hi)), span(hi - lo) {
        const double m = static_cast<double>(centers.size());
        const double mean = std::accumulate(centers.begin(), centers.end(), 0.0) / m;
        double var = 0.0;
        for (double x : centers) var += (x - mean) * (x - mean);
        // Scott's rule, clipped from below by span/(m+1) so a tight cluster
        // of observations cannot collapse the kernel and stall exploration.
        bw = std::clamp(std::sqrt(var / m) * std::pow(m, -0.2),
                        span / std::min(100.0, m + 1.0), span);
    }

    double logpdf(double x) const {
        auto kernel = [](double z) { return std::exp(-0.5 * z * z); };
        double s = kernel((x - mid) / span) / span;
        for (double c : centers) s += kernel((x - c) / bw) / bw;
        if (s < 1e-300) s = 1e-300;
        return std::log(s) - std::log(static_cast<double>(centers.size() + 1) *
                                      std::sqrt(2.0 * std::numbers::pi));
    }

    // Draw from the mixture: two pinned variates per call regardless of the
    // branch taken, so consumption stays reproducible.
    double sample(std::mt19937_64& eng) const {
        const size_t m = centers.size();
        size_t pick = static_cast<size_t>(uniform01(eng) * static_cast<double>(m + 1));
        if (pick > m) pick = m;
        const double g = gaussian(eng);
        return pick == m ? mid + g * span : centers[pick] + g * bw;
    }
};

} // namespace detail

// One suggestion. Startup calls draw uniformly over the (transformed) box;
// afterwards the history is split at the gamma quantile into good/bad sets,
// per-dimension kernel densities l and g are fitted, and the best of
// kTpeCandidates draws from l by the ratio l/g wins. Deterministic for a
// given (history, seed): the engine is keyed by the history length.
inline TrialParams tpe_suggest(const std::vector<TpeObservation>& history, const ParamRanges& r,
                               std::uint64_t seed) {
    r.validate();
    const auto dims = detail::tpe_dims(r);
    auto eng = make_engine(seed, "tpe", static_cast<std::uint64_t>(history.size()));

    std::array<double, 4> x{};
    if (history.size() < static_cast<size_t>(kTpeStartup)) {
        for (size_t d = 0; d < 4; ++d) x[d] = uniform_in(eng, dims[d].lo, dims[d].hi);
        return detail::from_tpe_space(x, r);
    }

    // Stable sort keeps insertion order among equal MAEs, so ties cannot
    // make the split order-dependent.
    std::vector<size_t> order(history.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return history[a].mae < history[b].mae;
    });
    size_t n_good = static_cast<size_t>(
        std::ceil(kTpeGamma * static_cast<double>(history.size())));
    n_good = std::clamp<size_t>(n_good, 1, history.size() - 1);

    std::array<std::vector<double>, 4> good_v, bad_v;
    for (size_t k = 0; k < order.size(); ++k) {
        const auto t = detail::to_tpe_space(history[order[k]].params);
        for (size_t d = 0; d < 4; ++d) (k < n_good ? good_v[d] : bad_v[d]).push_back(t[d]);
    }
    std::vector<detail::Kde> l, g;
    for (size_t d = 0; d < 4; ++d) {
        l.emplace_back(std::move(good_v[d]), dims[d].lo, dims[d].hi);
        g.emplace_back(std::move(bad_v[d]), dims[d].lo, dims[d].hi);
    }

    double best_score = -std::numeric_limits<double>::infinity();
    std::array<double, 4> best{};
    for (int cand = 0; cand < kTpeCandidates; ++cand) {
        std::array<double, 4> c{};
        for (size_t d = 0; d < 4; ++d)
            c[d] = std::clamp(l[d].sample(eng), dims[d].lo, dims[d].hi);
        double score = 0.0;
        for (size_t d = 0; d < 4; ++d) score += l[d].logpdf(c[d]) - g[d].logpdf(c[d]);
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    return detail::from_tpe_space(best, r);
}

} // namespace pinnse::hpo
