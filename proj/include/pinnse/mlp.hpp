#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "pinnse/csv.hpp"
#include "pinnse/errors.hpp"
#include "pinnse/matrix.hpp"
#include "pinnse/rng.hpp"

namespace pinnse::nn {

// Dense feed-forward net: tanh hidden layers, linear output. weights[l] is
// (dims[l+1] x dims[l]) row-major so a forward step is one gemm_nt.
struct MlpModel {
    std::vector<int> layer_dims;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    int n_layers() const { return static_cast<int>(weights.size()); }
    int in_dim() const { return layer_dims.front(); }
    int out_dim() const { return layer_dims.back(); }

    size_t n_params() const {
        size_t n = 0;
        for (int l = 0; l < n_layers(); ++l)
            n += weights[static_cast<size_t>(l)].a.size() + biases[static_cast<size_t>(l)].size();
        return n;
    }
};

inline MlpModel glorot_init(const std::vector<int>& dims, uint64_t seed) {
    if (dims.size() < 2) throw contract_error("need at least input and output dims");
    for (int d : dims)
        if (d <= 0) throw contract_error("layer dims must be positive");
    MlpModel m;
    m.layer_dims = dims;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        const int fan_in = dims[l], fan_out = dims[l + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        auto eng = make_engine(seed, "glorot", static_cast<uint64_t>(l));
        for (double& v : w.a) v = uniform_in(eng, -bound, bound);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(static_cast<size_t>(fan_out), 0.0);
    }
    return m;
}

// Activations per layer, kept for the backward pass. acts[0] is the input
// batch; acts[L] is the network output.
struct ForwardCache {
    std::vector<Matrix> acts;
};

inline void forward(const MlpModel& m, const Matrix& x, ForwardCache& cache) {
    if (x.cols != m.in_dim()) throw contract_error("input width does not match model");
    cache.acts.assign(1, x);
    cache.acts.resize(static_cast<size_t>(m.n_layers()) + 1);
    for (int l = 0; l < m.n_layers(); ++l) {
        Matrix& out = cache.acts[static_cast<size_t>(l) + 1];
        gemm_nt(cache.acts[static_cast<size_t>(l)], m.weights[static_cast<size_t>(l)], out);
        const auto& b = m.biases[static_cast<size_t>(l)];
        const bool hidden = l + 1 < m.n_layers();
        for (int r = 0; r < out.rows; ++r) {
            double* row = out.row(r);
            for (int c = 0; c < out.cols; ++c) {
                row[c] += b[static_cast<size_t>(c)];
                if (hidden) row[c] = std::tanh(row[c]);
            }
        }
    }
}

inline Matrix forward(const MlpModel& m, const Matrix& x) {
    ForwardCache cache;
    forward(m, x, cache);
    return cache.acts.back();
}

struct Gradients {
    std::vector<Matrix> dw;
    std::vector<std::vector<double>> db;
};

// Reverse mode from dLoss/dOutput. Hidden activations invert through
// dtanh = 1 - a^2; the output layer is linear.
inline Gradients backward(const MlpModel& m, const ForwardCache& cache, const Matrix& dout) {
    const Matrix& yout = cache.acts.back();
    if (!dout.same_shape(yout)) throw contract_error("gradient shape does not match output");
    Gradients g;
    g.dw.resize(static_cast<size_t>(m.n_layers()));
    g.db.resize(static_cast<size_t>(m.n_layers()));

    Matrix delta = dout;
    for (int l = m.n_layers() - 1; l >= 0; --l) {
        const Matrix& a_in = cache.acts[static_cast<size_t>(l)];
        gemm_tn(delta, a_in, g.dw[static_cast<size_t>(l)]);
        auto& db = g.db[static_cast<size_t>(l)];
        db.assign(static_cast<size_t>(delta.cols), 0.0);
        for (int r = 0; r < delta.rows; ++r) {
            const double* row = delta.row(r);
            for (int c = 0; c < delta.cols; ++c) db[static_cast<size_t>(c)] += row[c];
        }
        if (l == 0) break;
        Matrix prev;
        gemm_nn(delta, m.weights[static_cast<size_t>(l)], prev);
        for (int r = 0; r < prev.rows; ++r) {
            double* pr = prev.row(r);
            const double* ar = a_in.row(r);
            for (int c = 0; c < prev.cols; ++c) pr[c] *= 1.0 - ar[c] * ar[c];
        }
        delta = std::move(prev);
    }
    return g;
}

inline std::string serialize_model(const MlpModel& m) {
    std::ostringstream out;
    out << "pinnse-mlp 1\n";
    out << "dims";
    for (int d : m.layer_dims) out << " " << d;
    out << "\n";
    for (int l = 0; l < m.n_layers(); ++l) {
        out << "W " << l;
        for (double v : m.weights[static_cast<size_t>(l)].a) out << " " << fmt_g17(v);
        out << "\n";
        out << "b " << l;
        for (double v : m.biases[static_cast<size_t>(l)]) out << " " << fmt_g17(v);
        out << "\n";
    }
    return out.str();
}

inline MlpModel parse_model(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "pinnse-mlp 1")
        throw parse_error("not a model file (bad magic)", 1);
    if (!std::getline(in, line)) throw parse_error("missing dims line", 2);
    std::istringstream dims_ss(line);
    std::string kw;
    dims_ss >> kw;
    if (kw != "dims") throw parse_error("missing dims line", 2);
    std::vector<int> dims;
    int d;
    while (dims_ss >> d) dims.push_back(d);
    if (dims.size() < 2) throw parse_error("model needs at least two dims", 2);

    MlpModel m;
    m.layer_dims = dims;
    m.weights.resize(dims.size() - 1);
    m.biases.resize(dims.size() - 1);
    int ln = 2;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tag;
        int l;
        ss >> tag >> l;
        if (l < 0 || l >= static_cast<int>(dims.size()) - 1)
            throw parse_error("layer index out of range", ln);
        std::vector<double> vals;
        std::string tok;
        while (ss >> tok) vals.push_back(std::strtod(tok.c_str(), nullptr));
        const int fan_in = dims[static_cast<size_t>(l)], fan_out = dims[static_cast<size_t>(l) + 1];
        if (tag == "W") {
            if (static_cast<int>(vals.size()) != fan_in * fan_out)
                throw parse_error("weight count mismatch", ln);
            Matrix w(fan_out, fan_in);
            std::copy(vals.begin(), vals.end(), w.a.begin());
            m.weights[static_cast<size_t>(l)] = std::move(w);
        } else if (tag == "b") {
            if (static_cast<int>(vals.size()) != fan_out)
                throw parse_error("bias count mismatch", ln);
            m.biases[static_cast<size_t>(l)] = std::move(vals);
        } else {
            throw parse_error("unknown record: " + tag, ln);
        }
    }
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        if (m.weights[l].a.empty() || m.biases[l].empty())
            throw parse_error("incomplete model: layer " + std::to_string(l));
    }
    return m;
}

inline void save_model(const MlpModel& m, const std::string& path) {
    write_file_atomic(path, serialize_model(m));
}

inline MlpModel load_model(const std::string& path) { return parse_model(read_file(path)); }

} // namespace pinnse::nn
