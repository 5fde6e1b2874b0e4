#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "pinnse/attack.hpp"
#include "pinnse/dataset.hpp"
#include "pinnse/errors.hpp"
#include "pinnse/powerflow.hpp"
#include "pinnse/rng.hpp"
#include "pinnse/scenario.hpp"
#include "pinnse/ybus.hpp"

namespace pinnse::forge {

inline constexpr int kSamplesPerDay = 96; // 15-minute cadence

// Hourly load multipliers: overnight trough at 03:00, evening peak at 19:00.
inline constexpr std::array<double, 24> kDailyCurve = {
    0.72, 0.68, 0.65, 0.63, 0.64, 0.68, 0.76, 0.86, 0.94, 0.99, 1.02, 1.03,
    1.01, 0.98, 0.96, 0.95, 0.97, 1.02, 1.08, 1.12, 1.10, 1.04, 0.92, 0.80};

inline double daily_multiplier(double t_hours) {
    double t = std::fmod(t_hours, 24.0);
    if (t < 0.0) t += 24.0;
    int h = static_cast<int>(t);
    double frac = t - h;
    double a = kDailyCurve[static_cast<size_t>(h)];
    double b = kDailyCurve[static_cast<size_t>((h + 1) % 24)];
    return a + frac * (b - a);
}

// Quasi-static fault window: 10% of the trajectory, centered.
inline std::pair<int, int> fault_window(int count) {
    return {static_cast<int>(0.45 * count), static_cast<int>(0.55 * count)};
}

namespace detail {

inline Sample solve_step(const grid::GridCase& gc, const grid::AdmittanceMatrix& y, int idx,
                         double t) {
    auto sol = pf::solve_nr(gc, y);
    if (!sol.converged)
        throw generation_error("power flow diverged at step " + std::to_string(idx));
    Sample s;
    s.t = t;
    pf::injections(sol.state, y, s.p, s.q);
    s.vm = sol.state.vm;
    s.va = sol.state.va;
    return s;
}

// Linear ramp profile: 40% pre-event, 20% ramp, 40% post-event.
inline double ramp_alpha(int idx, int count) {
    int pre = static_cast<int>(0.4 * count);
    int ramp = static_cast<int>(0.2 * count);
    if (idx < pre) return 0.0;
    if (ramp <= 0 || idx >= pre + ramp) return 1.0;
    return static_cast<double>(idx - pre + 1) / static_cast<double>(ramp);
}

inline grid::GridCase at_alpha(const grid::GridCase& base, const Recipe& r, double alpha) {
    grid::GridCase gc = base;
    switch (r.kind) {
    case RecipeKind::Shutdown: {
        auto& b = gc.buses[static_cast<size_t>(gc.bus_index(r.gen_bus))];
        b.gen_p *= 1.0 - alpha;
        break;
    }
    case RecipeKind::Ramp: {
        auto& b = gc.buses[static_cast<size_t>(gc.bus_index(r.gen_bus))];
        b.gen_p += alpha * r.delta_mw;
        break;
    }
    case RecipeKind::LoadDelta:
        if (r.spread_buses.empty()) {
            if (alpha != 0.0) gc = pf::spread_system_load(gc, alpha * r.delta_mw);
        } else {
            double share = r.delta_mw / static_cast<double>(r.spread_buses.size());
            for (int id : r.spread_buses)
                gc.buses[static_cast<size_t>(gc.bus_index(id))].load_p += alpha * share;
        }
        break;
    default: throw contract_error("at_alpha: not a disturbance recipe");
    }
    return gc;
}

} // namespace detail

inline Dataset gen_daily_profile(const grid::GridCase& gc, const Recipe& r, int count,
                                 std::uint64_t seed) {
    if (count <= 0) throw contract_error("gen_daily_profile: count must be > 0");
    Dataset ds;
    ds.case_name = gc.name;
    ds.n_bus = gc.n();
    const auto y = grid::build_ybus(gc);
    const int slack = gc.slack_index();
    for (int idx = 0; idx < count; ++idx) {
        double t = static_cast<double>(idx) * 24.0 / kSamplesPerDay;
        double m = r.flat_curve ? 1.0 : daily_multiplier(t);
        grid::GridCase step = gc;
        auto eng = make_engine(seed, "jitter", static_cast<std::uint64_t>(idx));
        for (int i = 0; i < gc.n(); ++i) {
            double f = m * (1.0 + r.jitter * gaussian(eng));
            auto& b = step.buses[static_cast<size_t>(i)];
            b.load_p *= f;
            b.load_q *= f;
            if (i != slack) b.gen_p *= m;
        }
        ds.samples.push_back(detail::solve_step(step, y, idx, t));
    }
    return ds;
}

inline Dataset gen_disturbance(const grid::GridCase& gc, const Recipe& r, int count) {
    if (count <= 0) throw contract_error("gen_disturbance: count must be > 0");
    Dataset ds;
    ds.case_name = gc.name;
    ds.n_bus = gc.n();
    const auto y = grid::build_ybus(gc);
    for (int idx = 0; idx < count; ++idx) {
        grid::GridCase step = detail::at_alpha(gc, r, detail::ramp_alpha(idx, count));
        ds.samples.push_back(detail::solve_step(step, y, idx, static_cast<double>(idx)));
    }
    return ds;
}

inline Dataset gen_fault(const grid::GridCase& gc, const Recipe& r, int count) {
    if (count <= 0) throw contract_error("gen_fault: count must be > 0");
    Dataset ds;
    ds.case_name = gc.name;
    ds.n_bus = gc.n();
    const auto y = grid::build_ybus(gc);
    const grid::GridCase faulted = pf::apply_fault(gc, r.fault_bus, r.r_fault);
    const auto y_fault = grid::build_ybus(faulted);
    auto [w0, w1] = fault_window(count);
    for (int idx = 0; idx < count; ++idx) {
        bool in = idx >= w0 && idx < w1;
        ds.samples.push_back(detail::solve_step(in ? faulted : gc, in ? y_fault : y, idx,
                                                static_cast<double>(idx)));
    }
    return ds;
}

inline Dataset gen_trajectory(const grid::GridCase& gc, const Recipe& r, int count,
                              std::uint64_t seed) {
    switch (r.kind) {
    case RecipeKind::Daily: return gen_daily_profile(gc, r, count, seed);
    case RecipeKind::Shutdown:
    case RecipeKind::LoadDelta:
    case RecipeKind::Ramp: return gen_disturbance(gc, r, count);
    case RecipeKind::Fault: return gen_fault(gc, r, count);
    case RecipeKind::SubsetOfTrain:
        throw contract_error("subset_of_train has no trajectory of its own");
    }
    throw contract_error("unknown recipe kind");
}

// Multiplicative measurement noise on the inputs; targets untouched.
inline Dataset inject_noise(const Dataset& ds, double level, std::uint64_t seed,
                            const std::string& tag = "noise") {
    if (level < 0.0) throw contract_error("inject_noise: level must be >= 0");
    Dataset out = ds;
    if (level == 0.0) return out;
    for (size_t idx = 0; idx < out.samples.size(); ++idx) {
        auto eng = make_engine(seed, tag, static_cast<std::uint64_t>(idx));
        auto& s = out.samples[idx];
        for (auto& v : s.p) v += level * std::abs(v) * gaussian(eng);
        for (auto& v : s.q) v += level * std::abs(v) * gaussian(eng);
    }
    return out;
}

struct ScenarioData {
    Dataset train, val, test;
};

// Clean trajectories per the spec'd recipes, then noise, then any attack on test.
// A subset_of_train test recipe extends the training trajectory so the test
// points are unseen continuations of the same process.
inline ScenarioData make_scenario_datasets(const grid::GridCase& gc, const ScenarioSpec& sp) {
    validate_scenario(sp, gc);
    ScenarioData out;
    if (sp.test.kind == RecipeKind::SubsetOfTrain) {
        int total = sp.train_count + sp.val_count + sp.test_count;
        Dataset traj = gen_trajectory(gc, sp.train, total, sp.seed);
        out.train = traj.slice(0, sp.train_count);
        out.val = traj.slice(sp.train_count, sp.val_count);
        out.test = traj.slice(sp.train_count + sp.val_count, sp.test_count);
    } else {
        Dataset traj = gen_trajectory(gc, sp.train, sp.train_count + sp.val_count, sp.seed);
        out.train = traj.slice(0, sp.train_count);
        out.val = traj.slice(sp.train_count, sp.val_count);
        out.test = gen_trajectory(gc, sp.test, sp.test_count, sp.seed);
    }
    out.train = inject_noise(out.train, sp.noise_level, sp.seed, "noise-train");
    out.val = inject_noise(out.val, sp.noise_level, sp.seed, "noise-val");
    out.test = inject_noise(out.test, sp.noise_level, sp.seed, "noise-test");
    if (sp.has_attack) out.test = apply_attack(out.test, sp.attack);
    return out;
}

} // namespace pinnse::forge
