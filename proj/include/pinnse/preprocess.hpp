#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pinnse/dataset.hpp"
#include "pinnse/errors.hpp"
#include "pinnse/kvconfig.hpp"
#include "pinnse/matrix.hpp"

namespace pinnse::forge {

inline constexpr double kZeroEps = 1e-8;

struct FeatureMeta {
    double mean = 0.0, stdev = 1.0; // standardization (inputs only)
    double lo = -1.0, hi = 1.0;     // min-max extrema in standardized space
    bool degenerate = false;        // constant feature: maps to 0, inverts to lo

    bool operator==(const FeatureMeta&) const = default;
};

// Normalization metadata, fitted on the training split only.
// Input features are [P_1..P_N, Q_1..Q_N]; targets are [vm_1..vm_N, va_1..va_N]
// with vm shifted by -1.0 before min-max scaling.
struct NormMeta {
    int n_bus = 0;
    std::vector<FeatureMeta> in;  // 2N entries, standardize then min-max
    std::vector<FeatureMeta> tgt; // 2N entries, min-max only (mean/stdev unused)

    bool operator==(const NormMeta&) const = default;
};

namespace detail {

inline double minmax_fwd(double z, const FeatureMeta& f) {
    if (f.degenerate) return 0.0;
    return -1.0 + 2.0 * (z - f.lo) / (f.hi - f.lo);
}

inline double minmax_inv(double y, const FeatureMeta& f) {
    if (f.degenerate) return f.lo;
    return f.lo + (y + 1.0) * 0.5 * (f.hi - f.lo);
}

inline double input_raw(const Sample& s, int n, int j) {
    double v = j < n ? s.p[static_cast<size_t>(j)] : s.q[static_cast<size_t>(j - n)];
    if (v == 0.0) v = kZeroEps;
    return v;
}

inline double target_raw(const Sample& s, int n, int j) {
    return j < n ? s.vm[static_cast<size_t>(j)] - 1.0 : s.va[static_cast<size_t>(j - n)];
}

} // namespace detail

// Slope of the j-th target's normalized value per unit of physical value.
// Zero for degenerate features, matching the constant inversion.
inline double target_slope(const NormMeta& m, int j) {
    const auto& f = m.tgt[static_cast<size_t>(j)];
    if (f.degenerate) return 0.0;
    return 2.0 / (f.hi - f.lo);
}

// Physical units gained per unit of normalized output: the chain-rule factor
// for gradients flowing back into the network.
inline double target_inv_slope(const NormMeta& m, int j) {
    const auto& f = m.tgt[static_cast<size_t>(j)];
    if (f.degenerate) return 0.0;
    return 0.5 * (f.hi - f.lo);
}

inline NormMeta fit_norm(const Dataset& train) {
    if (train.samples.empty()) throw contract_error("fit_norm: empty training split");
    const int n = train.n_bus;
    const int d = 2 * n;
    const double cnt = static_cast<double>(train.size());
    NormMeta m;
    m.n_bus = n;
    m.in.resize(static_cast<size_t>(d));
    m.tgt.resize(static_cast<size_t>(d));

    for (int j = 0; j < d; ++j) {
        auto& f = m.in[static_cast<size_t>(j)];
        double sum = 0.0, sq = 0.0;
        for (const auto& s : train.samples) {
            double v = detail::input_raw(s, n, j);
            sum += v;
            sq += v * v;
        }
        f.mean = sum / cnt;
        double var = sq / cnt - f.mean * f.mean;
        f.stdev = var > 0.0 ? std::sqrt(var) : 0.0;
        if (f.stdev == 0.0) {
            f.degenerate = true;
            f.lo = f.hi = 0.0;
            f.stdev = 1.0;
            continue;
        }
        f.lo = std::numeric_limits<double>::infinity();
        f.hi = -std::numeric_limits<double>::infinity();
        for (const auto& s : train.samples) {
            double z = (detail::input_raw(s, n, j) - f.mean) / f.stdev;
            f.lo = std::min(f.lo, z);
            f.hi = std::max(f.hi, z);
        }
        if (f.lo == f.hi) {
            f.degenerate = true;
            f.hi = f.lo; // keep lo as the constant for inversion
        }
    }

    for (int j = 0; j < d; ++j) {
        auto& f = m.tgt[static_cast<size_t>(j)];
        f.lo = std::numeric_limits<double>::infinity();
        f.hi = -std::numeric_limits<double>::infinity();
        for (const auto& s : train.samples) {
            double v = detail::target_raw(s, n, j);
            f.lo = std::min(f.lo, v);
            f.hi = std::max(f.hi, v);
        }
        if (f.lo == f.hi) f.degenerate = true;
    }
    return m;
}

// Rows are samples: X is (B x 2N) normalized inputs, T is (B x 2N) normalized targets.
inline void apply_norm(const NormMeta& m, const Dataset& ds, Matrix& X, Matrix& T) {
    if (ds.n_bus != m.n_bus) throw contract_error("apply_norm: bus count mismatch");
    const int n = m.n_bus, d = 2 * n, B = ds.size();
    X = Matrix(B, d);
    T = Matrix(B, d);
    for (int r = 0; r < B; ++r) {
        const auto& s = ds.samples[static_cast<size_t>(r)];
        for (int j = 0; j < d; ++j) {
            const auto& f = m.in[static_cast<size_t>(j)];
            double z = (detail::input_raw(s, n, j) - f.mean) / f.stdev;
            X(r, j) = detail::minmax_fwd(z, f);
            T(r, j) = detail::minmax_fwd(detail::target_raw(s, n, j), m.tgt[static_cast<size_t>(j)]);
        }
    }
}

// Invert one row of normalized network output back to (vm, va) in physical units.
inline void invert_targets(const NormMeta& m, const double* row, std::vector<double>& vm,
                           std::vector<double>& va) {
    const int n = m.n_bus;
    vm.resize(static_cast<size_t>(n));
    va.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        vm[static_cast<size_t>(i)] = 1.0 + detail::minmax_inv(row[i], m.tgt[static_cast<size_t>(i)]);
        va[static_cast<size_t>(i)] = detail::minmax_inv(row[n + i], m.tgt[static_cast<size_t>(n + i)]);
    }
}

inline KvConfig norm_meta_to_config(const NormMeta& m) {
    KvConfig cfg;
    cfg.set("meta", "n_bus", std::to_string(m.n_bus));
    auto put = [&](const std::string& sec, const FeatureMeta& f) {
        cfg.set(sec, "mean", fmt_g17(f.mean));
        cfg.set(sec, "stdev", fmt_g17(f.stdev));
        cfg.set(sec, "lo", fmt_g17(f.lo));
        cfg.set(sec, "hi", fmt_g17(f.hi));
        cfg.set(sec, "degenerate", f.degenerate ? "true" : "false");
    };
    for (size_t j = 0; j < m.in.size(); ++j) put("in_" + std::to_string(j), m.in[j]);
    for (size_t j = 0; j < m.tgt.size(); ++j) put("tgt_" + std::to_string(j), m.tgt[j]);
    return cfg;
}

inline NormMeta norm_meta_from_config(const KvConfig& cfg) {
    NormMeta m;
    m.n_bus = cfg.get_int("meta", "n_bus", -1);
    if (m.n_bus <= 0) throw config_error("norm meta: bad or missing n_bus");
    auto grab = [&](const std::string& sec) {
        FeatureMeta f;
        f.mean = cfg.require_double(sec, "mean");
        f.stdev = cfg.require_double(sec, "stdev");
        f.lo = cfg.require_double(sec, "lo");
        f.hi = cfg.require_double(sec, "hi");
        f.degenerate = cfg.get_bool(sec, "degenerate", false);
        return f;
    };
    const int d = 2 * m.n_bus;
    for (int j = 0; j < d; ++j) m.in.push_back(grab("in_" + std::to_string(j)));
    for (int j = 0; j < d; ++j) m.tgt.push_back(grab("tgt_" + std::to_string(j)));
    return m;
}

} // namespace pinnse::forge
