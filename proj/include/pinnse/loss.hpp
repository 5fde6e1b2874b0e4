#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "pinnse/errors.hpp"
#include "pinnse/grid.hpp"
#include "pinnse/matrix.hpp"
#include "pinnse/preprocess.hpp"
#include "pinnse/ybus.hpp"

namespace pinnse::loss {

using forge::NormMeta;

struct LossWeights {
    double lambda_d = 1.0, lambda_p = 0.0, lambda_c = 0.0;

    bool operator==(const LossWeights&) const = default;

    void validate() const {
        auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!in01(lambda_d) || !in01(lambda_p) || !in01(lambda_c))
            throw contract_error("loss weights must lie in [0,1]");
        if (std::abs(lambda_d + lambda_p + lambda_c - 1.0) > 1e-12)
            throw contract_error("loss weights must sum to 1");
    }
};

inline double combine(const LossWeights& w, double d, double p, double c) {
    return w.lambda_d * d + w.lambda_p * p + w.lambda_c * c;
}

enum class Quantity { Vm, Va };

struct ConstantEntry {
    int bus = 0;
    Quantity q = Quantity::Vm;
    double value = 0.0;

    bool operator==(const ConstantEntry&) const = default;
};

struct ConstantsSpec {
    std::vector<ConstantEntry> entries;

    bool operator==(const ConstantsSpec&) const = default;
};

// Known-constant entries for a case: the slack bus pins both components;
// PV setpoints are trustworthy only while regulation holds, so they join
// for steady-state scenarios only.
inline ConstantsSpec make_constants(const grid::GridCase& gc, bool steady_state) {
    ConstantsSpec cs;
    for (const auto& b : gc.buses) {
        if (b.kind == grid::BusKind::Slack) {
            cs.entries.push_back({b.id, Quantity::Vm, b.voltage_setpoint});
            cs.entries.push_back({b.id, Quantity::Va, 0.0});
        } else if (b.kind == grid::BusKind::PV && steady_state) {
            cs.entries.push_back({b.id, Quantity::Vm, b.voltage_setpoint});
        }
    }
    return cs;
}

// The current operator applied to voltages. The conjugated form is the
// default; the flag records which one was built.
struct PhysicsContext {
    CMatrix y_op;
    bool conjugated = true;
    NormMeta meta;
};

inline PhysicsContext make_physics_context(const CMatrix& y, bool conjugated,
                                           NormMeta meta = {}) {
    PhysicsContext ctx;
    ctx.y_op = y;
    if (conjugated)
        for (auto& v : ctx.y_op.a) v = std::conj(v);
    ctx.conjugated = conjugated;
    ctx.meta = std::move(meta);
    return ctx;
}

inline PhysicsContext make_physics_context(const grid::AdmittanceMatrix& y, bool conjugated,
                                           NormMeta meta = {}) {
    return make_physics_context(y.y, conjugated, std::move(meta));
}

inline std::vector<cx> to_complex_voltage(const std::vector<double>& vm,
                                          const std::vector<double>& va) {
    if (vm.size() != va.size()) throw contract_error("vm/va length mismatch");
    std::vector<cx> v(vm.size());
    for (size_t i = 0; i < vm.size(); ++i) v[i] = std::polar(vm[i], va[i]);
    return v;
}

inline double loss_data(const std::vector<cx>& v_est, const std::vector<cx>& v_true) {
    if (v_est.size() != v_true.size()) throw contract_error("loss_data: length mismatch");
    if (v_est.empty()) throw contract_error("loss_data: empty vectors");
    double s = 0.0;
    for (size_t i = 0; i < v_est.size(); ++i) s += std::norm(v_est[i] - v_true[i]);
    return s / static_cast<double>(v_est.size());
}

inline double loss_physics(const std::vector<cx>& v_est, const std::vector<cx>& v_true,
                           const PhysicsContext& ctx) {
    if (v_est.size() != v_true.size()) throw contract_error("loss_physics: length mismatch");
    if (static_cast<int>(v_est.size()) != ctx.y_op.n)
        throw contract_error("loss_physics: operator dimension mismatch");
    std::vector<cx> u(v_est.size());
    for (size_t i = 0; i < u.size(); ++i) u[i] = v_est[i] - v_true[i];
    std::vector<cx> iu;
    cmatvec(ctx.y_op, u, iu);
    double s = 0.0;
    for (const cx& w : iu) s += std::norm(w);
    return s / static_cast<double>(u.size());
}

inline double loss_constants(const std::vector<double>& vm, const std::vector<double>& va,
                             const ConstantsSpec& cs) {
    if (cs.entries.empty()) return 0.0;
    double s = 0.0;
    for (const auto& e : cs.entries) {
        size_t i = static_cast<size_t>(e.bus - 1);
        if (i >= vm.size()) throw contract_error("loss_constants: bus out of range");
        double est = e.q == Quantity::Vm ? vm[i] : va[i];
        double diff = est - e.value;
        s += diff * diff;
    }
    return s / static_cast<double>(cs.entries.size());
}

struct LossTerms {
    double total = 0.0, d = 0.0, p = 0.0, c = 0.0;
};

// Batched composite loss over normalized network outputs U against normalized
// targets T (both B x 2N, vm columns first). All three terms are evaluated in
// physical units after inverting the target normalization; the optional dU
// receives dTotal/dU for the backward pass.
inline LossTerms evaluate_loss(const Matrix& U, const Matrix& T, const LossWeights& w,
                               const PhysicsContext& ctx, const ConstantsSpec& cs,
                               Matrix* dU = nullptr) {
    w.validate();
    const int n = ctx.meta.n_bus;
    if (n <= 0) throw contract_error("evaluate_loss: physics context has no norm meta");
    if (U.cols != 2 * n || !U.same_shape(T))
        throw contract_error("evaluate_loss: batch shape does not match meta");
    if (ctx.y_op.n != n) throw contract_error("evaluate_loss: operator dimension mismatch");
    for (const auto& e : cs.entries)
        if (e.bus < 1 || e.bus > n) throw contract_error("evaluate_loss: constants bus out of range");

    const int B = U.rows;
    const double inv_b = 1.0 / static_cast<double>(B);
    const size_t m = cs.entries.size();
    if (dU) {
        *dU = Matrix(B, 2 * n);
    }

    LossTerms terms;
    std::vector<double> vm_est, va_est, vm_true, va_true;
    std::vector<cx> u(static_cast<size_t>(n)), au, g;
    std::vector<double> dvm(static_cast<size_t>(n)), dva(static_cast<size_t>(n));

    for (int b = 0; b < B; ++b) {
        forge::invert_targets(ctx.meta, U.row(b), vm_est, va_est);
        forge::invert_targets(ctx.meta, T.row(b), vm_true, va_true);
        auto v_est = to_complex_voltage(vm_est, va_est);
        auto v_true = to_complex_voltage(vm_true, va_true);

        double d_b = 0.0;
        for (int i = 0; i < n; ++i) {
            u[static_cast<size_t>(i)] = v_est[static_cast<size_t>(i)] - v_true[static_cast<size_t>(i)];
            d_b += std::norm(u[static_cast<size_t>(i)]);
        }
        d_b /= n;

        cmatvec(ctx.y_op, u, au);
        double p_b = 0.0;
        for (const cx& v : au) p_b += std::norm(v);
        p_b /= n;

        double c_b = 0.0;
        if (m > 0) {
            for (const auto& e : cs.entries) {
                size_t i = static_cast<size_t>(e.bus - 1);
                double diff = (e.q == Quantity::Vm ? vm_est[i] : va_est[i]) - e.value;
                c_b += diff * diff;
            }
            c_b /= static_cast<double>(m);
        }

        terms.d += d_b * inv_b;
        terms.p += p_b * inv_b;
        terms.c += c_b * inv_b;

        if (!dU) continue;

        cmatvec_herm(ctx.y_op, au, g);
        std::fill(dvm.begin(), dvm.end(), 0.0);
        std::fill(dva.begin(), dva.end(), 0.0);
        const double two_n = 2.0 / static_cast<double>(n);
        for (int i = 0; i < n; ++i) {
            const size_t si = static_cast<size_t>(i);
            const cx phase = std::polar(1.0, va_est[si]);
            const cx dva_dir = cx(0.0, 1.0) * v_est[si];
            double dd_vm = two_n * std::real(std::conj(u[si]) * phase);
            double dd_va = two_n * std::real(std::conj(u[si]) * dva_dir);
            double dp_vm = two_n * std::real(std::conj(g[si]) * phase);
            double dp_va = two_n * std::real(std::conj(g[si]) * dva_dir);
            dvm[si] = w.lambda_d * dd_vm + w.lambda_p * dp_vm;
            dva[si] = w.lambda_d * dd_va + w.lambda_p * dp_va;
        }
        if (m > 0 && w.lambda_c != 0.0) {
            const double two_m = 2.0 / static_cast<double>(m);
            for (const auto& e : cs.entries) {
                size_t i = static_cast<size_t>(e.bus - 1);
                if (e.q == Quantity::Vm)
                    dvm[i] += w.lambda_c * two_m * (vm_est[i] - e.value);
                else
                    dva[i] += w.lambda_c * two_m * (va_est[i] - e.value);
            }
        }
        double* drow = dU->row(b);
        for (int i = 0; i < n; ++i) {
            drow[i] = dvm[static_cast<size_t>(i)] * forge::target_inv_slope(ctx.meta, i) * inv_b;
            drow[n + i] =
                dva[static_cast<size_t>(i)] * forge::target_inv_slope(ctx.meta, n + i) * inv_b;
        }
    }
    terms.total = combine(w, terms.d, terms.p, terms.c);
    return terms;
}

} // namespace pinnse::loss
