#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pinnse/errors.hpp"
#include "pinnse/grid.hpp"
#include "pinnse/matrix.hpp"
#include "pinnse/ybus.hpp"

namespace pinnse::pf {

struct StateVector {
    std::vector<double> vm; // p.u.
    std::vector<double> va; // rad

    bool operator==(const StateVector&) const = default;
    int n() const { return static_cast<int>(vm.size()); }
};

struct PowerFlowSolution {
    StateVector state;
    int iterations = 0;
    double max_mismatch = 0.0;
    bool converged = false;
};

// Net injections P_i, Q_i in p.u. from the bus voltages and the admittance
// matrix. P and Q are resized to the bus count.
inline void injections(const StateVector& st, const grid::AdmittanceMatrix& y,
                       std::vector<double>& p, std::vector<double>& q) {
    const int n = y.n();
    if (st.n() != n || static_cast<int>(st.va.size()) != n)
        throw contract_error("state/admittance dimension mismatch");
    p.assign(static_cast<size_t>(n), 0.0);
    q.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double pi = 0.0, qi = 0.0;
        const double vi = st.vm[static_cast<size_t>(i)];
        const double ti = st.va[static_cast<size_t>(i)];
        for (int j = 0; j < n; ++j) {
            const cx yij = y(i, j);
            if (yij.real() == 0.0 && yij.imag() == 0.0) continue;
            const double vj = st.vm[static_cast<size_t>(j)];
            const double dt = ti - st.va[static_cast<size_t>(j)];
            const double c = std::cos(dt), s = std::sin(dt);
            pi += vj * (yij.real() * c + yij.imag() * s);
            qi += vj * (yij.real() * s - yij.imag() * c);
        }
        p[static_cast<size_t>(i)] = vi * pi;
        q[static_cast<size_t>(i)] = vi * qi;
    }
}

// Scheduled net injections in p.u.: P = (gen - load)/base, Q = -load/base.
// Q entries are meaningful for PQ buses only (generator Q is free).
inline void scheduled_injections(const grid::GridCase& gc, std::vector<double>& p_spec,
                                 std::vector<double>& q_spec) {
    const int n = gc.n();
    p_spec.assign(static_cast<size_t>(n), 0.0);
    q_spec.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const grid::Bus& b = gc.buses[static_cast<size_t>(i)];
        p_spec[static_cast<size_t>(i)] = (b.gen_p - b.load_p) / gc.base_mva;
        q_spec[static_cast<size_t>(i)] = -b.load_q / gc.base_mva;
    }
}

inline StateVector flat_start(const grid::GridCase& gc) {
    StateVector st;
    st.vm.resize(static_cast<size_t>(gc.n()));
    st.va.assign(static_cast<size_t>(gc.n()), 0.0);
    for (int i = 0; i < gc.n(); ++i) {
        const grid::Bus& b = gc.buses[static_cast<size_t>(i)];
        st.vm[static_cast<size_t>(i)] = b.kind == grid::BusKind::PQ ? 1.0 : b.voltage_setpoint;
    }
    return st;
}

// Analytic power-flow Jacobian in polar form. Rows: P equations for p_rows
// then Q equations for q_rows; columns: angles at p_rows then magnitudes at
// q_rows. p/q are the injections at the linearization state.
inline Matrix nr_jacobian(const StateVector& st, const grid::AdmittanceMatrix& y,
                          const std::vector<double>& p, const std::vector<double>& q,
                          const std::vector<int>& p_rows, const std::vector<int>& q_rows) {
    const int np = static_cast<int>(p_rows.size());
    const int nq = static_cast<int>(q_rows.size());
    Matrix jac(np + nq, np + nq);
    jac.fill(0.0);
    auto vm_at = [&](int i) { return st.vm[static_cast<size_t>(i)]; };
    auto va_at = [&](int i) { return st.va[static_cast<size_t>(i)]; };
    for (int r = 0; r < np; ++r) {
        const int i = p_rows[static_cast<size_t>(r)];
        const double vi = vm_at(i);
        for (int c = 0; c < np; ++c) {
            const int j = p_rows[static_cast<size_t>(c)];
            if (i == j) {
                jac(r, c) = -q[static_cast<size_t>(i)] - y.b(i, i) * vi * vi;
            } else {
                const double dt = va_at(i) - va_at(j);
                jac(r, c) = vi * vm_at(j) * (y.g(i, j) * std::sin(dt) - y.b(i, j) * std::cos(dt));
            }
        }
        for (int c = 0; c < nq; ++c) {
            const int j = q_rows[static_cast<size_t>(c)];
            if (i == j) {
                jac(r, np + c) = p[static_cast<size_t>(i)] / vi + y.g(i, i) * vi;
            } else {
                const double dt = va_at(i) - va_at(j);
                jac(r, np + c) = vi * (y.g(i, j) * std::cos(dt) + y.b(i, j) * std::sin(dt));
            }
        }
    }
    for (int r = 0; r < nq; ++r) {
        const int i = q_rows[static_cast<size_t>(r)];
        const double vi = vm_at(i);
        for (int c = 0; c < np; ++c) {
            const int j = p_rows[static_cast<size_t>(c)];
            if (i == j) {
                jac(np + r, c) = p[static_cast<size_t>(i)] - y.g(i, i) * vi * vi;
            } else {
                const double dt = va_at(i) - va_at(j);
                jac(np + r, c) =
                    -vi * vm_at(j) * (y.g(i, j) * std::cos(dt) + y.b(i, j) * std::sin(dt));
            }
        }
        for (int c = 0; c < nq; ++c) {
            const int j = q_rows[static_cast<size_t>(c)];
            if (i == j) {
                jac(np + r, np + c) = q[static_cast<size_t>(i)] / vi - y.b(i, i) * vi;
            } else {
                const double dt = va_at(i) - va_at(j);
                jac(np + r, np + c) = vi * (y.g(i, j) * std::sin(dt) - y.b(i, j) * std::cos(dt));
            }
        }
    }
    return jac;
}

// Newton-Raphson with the full analytic Jacobian in polar form. Mismatch is
// the infinity norm of the p.u. power residual (P rows for PV+PQ, Q rows for
// PQ). No PV->PQ switching: generator reactive output is unconstrained.
inline PowerFlowSolution solve_nr(const grid::GridCase& gc, const grid::AdmittanceMatrix& y,
                                  double tol = 1e-8, int max_iter = 20) {
    if (tol <= 0.0) throw contract_error("tolerance must be positive");
    const int n = gc.n();
    std::vector<int> p_rows; // bus indices with a P equation (non-slack)
    std::vector<int> q_rows; // bus indices with a Q equation (PQ)
    for (int i = 0; i < n; ++i) {
        const grid::Bus& b = gc.buses[static_cast<size_t>(i)];
        if (b.kind != grid::BusKind::Slack) p_rows.push_back(i);
        if (b.kind == grid::BusKind::PQ) q_rows.push_back(i);
    }
    const int np = static_cast<int>(p_rows.size());
    const int nq = static_cast<int>(q_rows.size());
    const int m = np + nq;

    std::vector<double> p_spec, q_spec, p, q;
    scheduled_injections(gc, p_spec, q_spec);

    PowerFlowSolution sol;
    sol.state = flat_start(gc);
    StateVector& st = sol.state;

    std::vector<double> f(static_cast<size_t>(m), 0.0);

    for (int it = 0; it <= max_iter; ++it) {
        injections(st, y, p, q);
        double worst = 0.0;
        for (int r = 0; r < np; ++r) {
            const int i = p_rows[static_cast<size_t>(r)];
            f[static_cast<size_t>(r)] = p_spec[static_cast<size_t>(i)] - p[static_cast<size_t>(i)];
            worst = std::max(worst, std::abs(f[static_cast<size_t>(r)]));
        }
        for (int r = 0; r < nq; ++r) {
            const int i = q_rows[static_cast<size_t>(r)];
            f[static_cast<size_t>(np + r)] =
                q_spec[static_cast<size_t>(i)] - q[static_cast<size_t>(i)];
            worst = std::max(worst, std::abs(f[static_cast<size_t>(np + r)]));
        }
        sol.iterations = it;
        sol.max_mismatch = worst;
        if (worst <= tol) {
            sol.converged = true;
            return sol;
        }
        if (it == max_iter) break;
        if (m == 0) break; // nothing to solve and still above tol: impossible load on slack-only case

        Matrix jac = nr_jacobian(st, y, p, q, p_rows, q_rows);
        if (!lu_solve(jac, f))
            throw numeric_error("power flow Jacobian singular at iteration " + std::to_string(it));
        for (int r = 0; r < np; ++r)
            st.va[static_cast<size_t>(p_rows[static_cast<size_t>(r)])] += f[static_cast<size_t>(r)];
        for (int r = 0; r < nq; ++r)
            st.vm[static_cast<size_t>(q_rows[static_cast<size_t>(r)])] +=
                f[static_cast<size_t>(np + r)];
    }
    sol.converged = false;
    return sol;
}

inline PowerFlowSolution solve_nr(const grid::GridCase& gc, double tol = 1e-8, int max_iter = 20) {
    auto y = grid::build_ybus(gc);
    return solve_nr(gc, y, tol, max_iter);
}

// Per-bus operating-point change: deltas in MW/MVAr, plus an optional
// absolute generator setting (shutdowns set gen_p to a fixed value).
struct BusChange {
    int bus = 0;
    double dload_p = 0.0;
    double dload_q = 0.0;
    double dgen_p = 0.0;
    bool set_gen = false;
    double gen_value = 0.0;
};

inline grid::GridCase apply_operating_point(const grid::GridCase& gc,
                                            const std::vector<BusChange>& changes) {
    grid::GridCase out = gc;
    for (const auto& ch : changes) {
        grid::Bus& b = out.bus(ch.bus); // throws contract_error on unknown id
        b.load_p += ch.dload_p;
        b.load_q += ch.dload_q;
        if (ch.set_gen)
            b.gen_p = ch.gen_value;
        else
            b.gen_p += ch.dgen_p;
    }
    return out;
}

// Multiplies every bus load (P and Q) by the same factor.
inline grid::GridCase scale_all_loads(const grid::GridCase& gc, double factor) {
    grid::GridCase out = gc;
    for (auto& b : out.buses) {
        b.load_p *= factor;
        b.load_q *= factor;
    }
    return out;
}

// Adds delta_mw of total system load, spread proportionally over existing
// loads (constant power factor per bus).
inline grid::GridCase spread_system_load(const grid::GridCase& gc, double delta_mw) {
    const double total = gc.total_load_p();
    if (total <= 0.0) throw contract_error("case has no load to spread over");
    return scale_all_loads(gc, 1.0 + delta_mw / total);
}

// Quasi-static fault: stamp the fault conductance 1/R at the bus.
inline grid::GridCase apply_fault(const grid::GridCase& gc, int bus_id, double r_fault) {
    if (r_fault <= 0.0) throw contract_error("fault resistance must be positive");
    grid::GridCase out = gc;
    out.bus(bus_id).shunt_g += 1.0 / r_fault;
    return out;
}

} // namespace pinnse::pf
