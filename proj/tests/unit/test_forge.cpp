#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "pinnse/case_io.hpp"
#include "pinnse/forge.hpp"

using namespace pinnse;
using namespace pinnse::forge;

namespace {

grid::GridCase ieee14() { return grid::load_case(repo_path("data/cases/ieee14.case")); }

// Net active injection drawn from the network, ignoring the slack bus.
double nonslack_draw(const grid::GridCase& gc, const Sample& s) {
    double sum = 0.0;
    for (int i = 0; i < gc.n(); ++i)
        if (i != gc.slack_index()) sum += s.p[static_cast<size_t>(i)];
    return -sum;
}

bool same_measurements(const Sample& a, const Sample& b) {
    return a.p == b.p && a.q == b.q && a.vm == b.vm && a.va == b.va;
}

} // namespace

TEST_CASE("daily multiplier interpolates the curve") {
    REQUIRE(daily_multiplier(0.0) == kDailyCurve[0]);
    REQUIRE(daily_multiplier(19.0) == 1.12);
    REQUIRE(daily_multiplier(3.0) == 0.63);
    REQUIRE(daily_multiplier(3.5) == Catch::Approx(0.5 * (0.63 + 0.64)));
    REQUIRE(daily_multiplier(23.5) == Catch::Approx(0.5 * (0.80 + 0.72)));
    REQUIRE(daily_multiplier(24.0) == daily_multiplier(0.0));
    REQUIRE(daily_multiplier(43.0) == daily_multiplier(19.0));
}

TEST_CASE("flat curve and zero jitter repeat the base case") {
    auto gc = ieee14();
    Recipe r;
    r.kind = RecipeKind::Daily;
    r.jitter = 0.0;
    r.flat_curve = true;
    auto ds = gen_daily_profile(gc, r, 96, 1);
    REQUIRE(ds.size() == 96);
    REQUIRE(ds.n_bus == 14);
    for (const auto& s : ds.samples) REQUIRE(same_measurements(s, ds.samples[0]));

    auto sol = pf::solve_nr(gc);
    REQUIRE(ds.samples[0].vm == sol.state.vm);
    REQUIRE(ds.samples[0].va == sol.state.va);
}

TEST_CASE("peak to trough ratio reproduces the curve ratio") {
    auto gc = ieee14();
    Recipe r;
    r.kind = RecipeKind::Daily;
    r.jitter = 0.0;
    auto ds = gen_daily_profile(gc, r, 500, 3);
    double lo = 1e300, hi = -1e300;
    for (const auto& s : ds.samples) {
        double draw = nonslack_draw(gc, s);
        lo = std::min(lo, draw);
        hi = std::max(hi, draw);
    }
    REQUIRE(hi / lo == Catch::Approx(1.12 / 0.63).epsilon(1e-5));
}

TEST_CASE("jittered generation is deterministic per seed") {
    auto gc = ieee14();
    Recipe r;
    r.kind = RecipeKind::Daily;
    auto a = gen_daily_profile(gc, r, 12, 42);
    auto b = gen_daily_profile(gc, r, 12, 42);
    auto c = gen_daily_profile(gc, r, 12, 43);
    REQUIRE(a == b);
    REQUIRE(a != c);
    bool spread = false;
    for (size_t k = 1; k < a.samples.size(); ++k)
        spread = spread || !same_measurements(a.samples[k], a.samples[0]);
    REQUIRE(spread);
}

TEST_CASE("every sample satisfies the power-flow equations") {
    auto gc = ieee14();
    Recipe r;
    r.kind = RecipeKind::Daily;
    auto ds = gen_daily_profile(gc, r, 10, 7);
    auto y = grid::build_ybus(gc);
    for (const auto& s : ds.samples) {
        pf::StateVector st{s.vm, s.va};
        std::vector<double> p, q;
        pf::injections(st, y, p, q);
        REQUIRE(p == s.p);
        REQUIRE(q == s.q);
    }
}

TEST_CASE("zero-magnitude disturbance repeats the base case") {
    auto gc = ieee14();
    Recipe r;
    r.kind = RecipeKind::Ramp;
    r.gen_bus = 2;
    r.delta_mw = 0.0;
    auto ds = gen_disturbance(gc, r, 10);
    for (const auto& s : ds.samples) REQUIRE(same_measurements(s, ds.samples[0]));
}

TEST_CASE("shutdown ramps the generator to zero through the middle fifth") {
    auto gc = ieee14();
    Recipe r;
    r.kind = RecipeKind::Shutdown;
    r.gen_bus = 2;
    auto ds = gen_disturbance(gc, r, 10);
    // phases: steps 0-3 pre-event, 4-5 ramp, 6-9 post-event
    for (int k = 1; k < 4; ++k) REQUIRE(same_measurements(ds.samples[k], ds.samples[0]));
    for (int k = 7; k < 10; ++k) REQUIRE(same_measurements(ds.samples[k], ds.samples[6]));
    REQUIRE(!same_measurements(ds.samples[4], ds.samples[0]));
    REQUIRE(!same_measurements(ds.samples[4], ds.samples[6]));

    // pre-event P at bus 2 = (40 - 21.7) MW; post-event = -21.7 MW
    REQUIRE(ds.samples[0].p[1] == Catch::Approx(0.183).margin(1e-7));
    REQUIRE(ds.samples[9].p[1] == Catch::Approx(-0.217).margin(1e-7));
}

TEST_CASE("system-wide load delta lands on the scheduled total") {
    auto gc = ieee14();
    Recipe r;
    r.kind = RecipeKind::LoadDelta;
    r.delta_mw = 40.0;
    auto ds = gen_disturbance(gc, r, 10);
    REQUIRE(nonslack_draw(gc, ds.samples[0]) == Catch::Approx(2.19).margin(1e-6));
    REQUIRE(nonslack_draw(gc, ds.samples[9]) == Catch::Approx(2.59).margin(1e-6));

    // constant power factor: reactive load scales with active load
    double q0 = ds.samples[0].q[3], q9 = ds.samples[9].q[3];
    REQUIRE(q9 / q0 == Catch::Approx(299.0 / 259.0).epsilon(1e-6));
}

TEST_CASE("explicit spread buses take equal active shares, reactive untouched") {
    auto gc = ieee14();
    Recipe r;
    r.kind = RecipeKind::LoadDelta;
    r.delta_mw = 10.0;
    r.spread_buses = {4, 5};
    auto ds = gen_disturbance(gc, r, 10);
    const auto& last = ds.samples[9];
    REQUIRE(last.p[3] == Catch::Approx(-(47.8 + 5.0) / 100.0).margin(1e-7));
    REQUIRE(last.p[4] == Catch::Approx(-(7.6 + 5.0) / 100.0).margin(1e-7));
    REQUIRE(last.q[3] == Catch::Approx(3.9 / 100.0).margin(1e-7));
    REQUIRE(last.q[4] == Catch::Approx(-1.6 / 100.0).margin(1e-7));
}

TEST_CASE("disturbance samples track the scheduled injections") {
    auto gc = ieee14();
    Recipe r;
    r.kind = RecipeKind::Shutdown;
    r.gen_bus = 2;
    auto ds = gen_disturbance(gc, r, 10);
    for (int k = 0; k < 10; ++k) {
        auto step = forge::detail::at_alpha(gc, r, forge::detail::ramp_alpha(k, 10));
        std::vector<double> p_spec, q_spec;
        pf::scheduled_injections(step, p_spec, q_spec);
        const auto& s = ds.samples[static_cast<size_t>(k)];
        for (int i = 0; i < gc.n(); ++i) {
            const auto& b = gc.buses[static_cast<size_t>(i)];
            if (b.kind == grid::BusKind::Slack) continue;
            REQUIRE(s.p[static_cast<size_t>(i)] ==
                    Catch::Approx(p_spec[static_cast<size_t>(i)]).margin(2e-8));
            if (b.kind == grid::BusKind::PQ)
                REQUIRE(s.q[static_cast<size_t>(i)] ==
                        Catch::Approx(q_spec[static_cast<size_t>(i)]).margin(2e-8));
        }
    }
}

TEST_CASE("fault window depresses the faulted bus and leaves the rest alone") {
    auto gc = ieee14();
    Recipe r;
    r.kind = RecipeKind::Fault;
    r.fault_bus = 2;
    r.r_fault = 0.5;
    REQUIRE(fault_window(20) == std::pair<int, int>(9, 11));
    auto ds = gen_fault(gc, r, 20);
    for (int k = 0; k < 20; ++k) {
        const auto& s = ds.samples[static_cast<size_t>(k)];
        bool in = k >= 9 && k < 11;
        if (in) {
            // bus 2 holds its setpoint (PV); the neighboring load bus 4 sags
            // and bus 2's reactive output swings to keep it up
            REQUIRE(s.vm[1] == ds.samples[0].vm[1]);
            REQUIRE(s.vm[3] < ds.samples[0].vm[3]);
            REQUIRE(std::abs(s.q[1] - ds.samples[0].q[1]) > 0.01);
        } else {
            REQUIRE(same_measurements(s, ds.samples[0]));
        }
    }
}

TEST_CASE("a vanishing fault admittance approaches the clean trajectory") {
    auto gc = ieee14();
    Recipe r;
    r.kind = RecipeKind::Fault;
    r.fault_bus = 2;
    r.r_fault = 1e12;
    auto ds = gen_fault(gc, r, 10);
    auto sol = pf::solve_nr(gc);
    for (const auto& s : ds.samples)
        for (int i = 0; i < 14; ++i) {
            REQUIRE(s.vm[static_cast<size_t>(i)] ==
                    Catch::Approx(sol.state.vm[static_cast<size_t>(i)]).margin(1e-6));
            REQUIRE(s.va[static_cast<size_t>(i)] ==
                    Catch::Approx(sol.state.va[static_cast<size_t>(i)]).margin(1e-6));
        }
}

TEST_CASE("noise level zero leaves the dataset unchanged") {
    auto gc = ieee14();
    Recipe r;
    r.kind = RecipeKind::Daily;
    auto ds = gen_daily_profile(gc, r, 5, 1);
    REQUIRE(inject_noise(ds, 0.0, 99) == ds);
    REQUIRE_THROWS_AS(inject_noise(ds, -0.1, 99), contract_error);
}

TEST_CASE("noise is relative, zero-mean, and seeded") {
    Dataset ds;
    ds.n_bus = 25;
    for (int k = 0; k < 200; ++k) {
        Sample s;
        s.t = k;
        s.p.assign(25, 2.0);
        s.q.assign(25, -0.5);
        s.vm.assign(25, 1.0);
        s.va.assign(25, 0.0);
        ds.samples.push_back(std::move(s));
    }
    auto noisy = inject_noise(ds, 0.01, 7);
    double sum = 0.0;
    long n = 0;
    for (size_t k = 0; k < noisy.samples.size(); ++k) {
        for (int i = 0; i < 25; ++i) {
            sum += (noisy.samples[k].p[static_cast<size_t>(i)] - 2.0) / 2.0;
            sum += (noisy.samples[k].q[static_cast<size_t>(i)] - -0.5) / -0.5;
            n += 2;
        }
        REQUIRE(noisy.samples[k].vm == ds.samples[k].vm);
        REQUIRE(noisy.samples[k].va == ds.samples[k].va);
    }
    REQUIRE(n == 10000);
    REQUIRE(std::abs(sum / static_cast<double>(n)) < 0.002);

    REQUIRE(inject_noise(ds, 0.01, 7) == noisy);
    REQUIRE(inject_noise(ds, 0.01, 8) != noisy);
    REQUIRE(inject_noise(ds, 0.01, 7, "noise-test") != noisy);
}

TEST_CASE("default attack schedule is stepped thirds") {
    auto sched = default_attack_schedule(100);
    REQUIRE(sched.size() == 3);
    REQUIRE(sched[0].count == 33);
    REQUIRE(sched[1].count == 33);
    REQUIRE(sched[2].count == 34);
    REQUIRE(sched[0].beta == 0.10);
    REQUIRE(sched[2].beta == 0.30);
}

TEST_CASE("attack multiplies exactly the target channels, bit-exact") {
    Dataset ds;
    ds.n_bus = 3;
    auto eng = make_engine(5, "atk");
    for (int k = 0; k < 100; ++k) {
        Sample s;
        s.t = k;
        for (int i = 0; i < 3; ++i) {
            s.p.push_back(uniform_in(eng, 0.5, 1.5));
            s.q.push_back(uniform_in(eng, -1.0, -0.1));
            s.vm.push_back(1.0);
            s.va.push_back(0.0);
        }
        ds.samples.push_back(std::move(s));
    }
    AttackSpec atk;
    atk.target_bus = 2;
    atk.schedule = default_attack_schedule(100);
    auto hit = apply_attack(ds, atk);

    int changed = 0;
    for (size_t k = 0; k < 100; ++k) {
        const auto& c = ds.samples[k];
        const auto& a = hit.samples[k];
        double mult = k < 33 ? 1.1 : k < 66 ? 1.2 : 1.3;
        for (int i = 0; i < 3; ++i) {
            if (i == 1) {
                REQUIRE(a.p[1] == c.p[1] * mult);
                REQUIRE(a.q[1] == c.q[1] * mult);
            } else {
                REQUIRE(a.p[static_cast<size_t>(i)] == c.p[static_cast<size_t>(i)]);
                REQUIRE(a.q[static_cast<size_t>(i)] == c.q[static_cast<size_t>(i)]);
            }
            changed += (a.p[static_cast<size_t>(i)] != c.p[static_cast<size_t>(i)]) +
                       (a.q[static_cast<size_t>(i)] != c.q[static_cast<size_t>(i)]);
        }
        REQUIRE(a.vm == c.vm);
        REQUIRE(a.va == c.va);
    }
    REQUIRE(changed == 200);
}

TEST_CASE("all-zero bias schedule is a no-op") {
    Dataset ds;
    ds.n_bus = 2;
    Sample s;
    s.t = 0;
    s.p = {1.0, 2.0};
    s.q = {3.0, 4.0};
    s.vm = {1.0, 1.0};
    s.va = {0.0, 0.0};
    ds.samples.assign(4, s);
    AttackSpec atk;
    atk.target_bus = 1;
    atk.schedule = {{4, 0.0}};
    REQUIRE(apply_attack(ds, atk) == ds);
}

TEST_CASE("attack validation rejects bad schedules") {
    Dataset ds;
    ds.n_bus = 2;
    Sample s;
    s.p = {1.0, 2.0};
    s.q = {0.1, 0.2};
    s.vm = {1.0, 1.0};
    s.va = {0.0, 0.0};
    ds.samples.assign(4, s);
    AttackSpec atk;
    atk.target_bus = 5;
    atk.schedule = {{4, 0.1}};
    REQUIRE_THROWS_AS(apply_attack(ds, atk), contract_error);
    atk.target_bus = 1;
    atk.schedule = {{3, 0.1}};
    REQUIRE_THROWS_AS(apply_attack(ds, atk), contract_error);
    atk.schedule = {{4, -0.1}};
    REQUIRE_THROWS_AS(apply_attack(ds, atk), contract_error);
}

TEST_CASE("scenario config parses into a full spec") {
    const std::string text = R"(
[scenario]
name = s5_1
case = data/cases/ieee14.case
seed = 21
noise = 0.01
train_count = 40
val_count = 10
test_count = 12

[train]
recipe = daily

[test]
recipe = subset_of_train

[attack]
target_bus = 4
)";
    auto sp = parse_scenario(KvConfig::parse(text, "inline"));
    REQUIRE(sp.name == "s5_1");
    REQUIRE(sp.seed == 21);
    REQUIRE(sp.train.kind == RecipeKind::Daily);
    REQUIRE(sp.test.kind == RecipeKind::SubsetOfTrain);
    REQUIRE(sp.has_attack);
    REQUIRE(sp.attack.target_bus == 4);
    REQUIRE(sp.attack.schedule.size() == 3);
    REQUIRE(sp.attack.schedule[0].count == 4);
    REQUIRE(sp.attack.schedule[2].count == 4);

    auto gc = ieee14();
    validate_scenario(sp, gc);
    sp.train.kind = RecipeKind::SubsetOfTrain;
    REQUIRE_THROWS_AS(validate_scenario(sp, gc), config_error);
}

TEST_CASE("subset test split continues the training trajectory") {
    auto gc = ieee14();
    ScenarioSpec sp;
    sp.name = "subset";
    sp.train.kind = RecipeKind::Daily;
    sp.test.kind = RecipeKind::SubsetOfTrain;
    sp.train_count = 20;
    sp.val_count = 6;
    sp.test_count = 4;
    sp.noise_level = 0.0;
    sp.seed = 31;
    auto data = make_scenario_datasets(gc, sp);
    REQUIRE(data.train.size() == 20);
    REQUIRE(data.val.size() == 6);
    REQUIRE(data.test.size() == 4);

    auto full = gen_daily_profile(gc, sp.train, 30, 31);
    REQUIRE(data.train == full.slice(0, 20));
    REQUIRE(data.val == full.slice(20, 6));
    REQUIRE(data.test == full.slice(26, 4));
}

TEST_CASE("scenario noise streams are split-independent") {
    auto gc = ieee14();
    ScenarioSpec sp;
    sp.name = "noisy";
    sp.train.kind = RecipeKind::Daily;
    sp.test.kind = RecipeKind::SubsetOfTrain;
    sp.train_count = 6;
    sp.val_count = 3;
    sp.test_count = 3;
    sp.noise_level = 0.01;
    sp.seed = 77;
    auto a = make_scenario_datasets(gc, sp);
    auto b = make_scenario_datasets(gc, sp);
    REQUIRE(a.train == b.train);
    REQUIRE(a.val == b.val);
    REQUIRE(a.test == b.test);

    auto clean = gen_daily_profile(gc, sp.train, 12, 77);
    REQUIRE(a.train != clean.slice(0, 6));
    for (int k = 0; k < 6; ++k)
        REQUIRE(a.train.samples[static_cast<size_t>(k)].vm ==
                clean.samples[static_cast<size_t>(k)].vm);
}
