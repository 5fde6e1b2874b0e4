#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "pinnse/case_io.hpp"
#include "pinnse/forge.hpp"
#include "pinnse/loss.hpp"

using namespace pinnse;
using namespace pinnse::loss;

namespace {

// A natural meta for direct physical-space tests: vm in [0.9, 1.1] (stored as
// offsets from 1), va in [-0.6, 0.6], nothing degenerate.
forge::NormMeta plain_meta(int n_bus) {
    forge::NormMeta m;
    m.n_bus = n_bus;
    forge::FeatureMeta in;
    in.lo = -1.0;
    in.hi = 1.0;
    m.in.assign(static_cast<size_t>(2 * n_bus), in);
    forge::FeatureMeta vm;
    vm.lo = -0.1;
    vm.hi = 0.1;
    forge::FeatureMeta va;
    va.lo = -0.6;
    va.hi = 0.6;
    for (int i = 0; i < n_bus; ++i) m.tgt.push_back(vm);
    for (int i = 0; i < n_bus; ++i) m.tgt.push_back(va);
    return m;
}

CMatrix two_bus_y() {
    CMatrix y(2);
    y(0, 0) = cx(0.0, -10.0);
    y(0, 1) = cx(0.0, 10.0);
    y(1, 0) = cx(0.0, 10.0);
    y(1, 1) = cx(0.0, -10.0);
    return y;
}

// Normalized row for given physical vm/va under plain_meta.
void fill_state(Matrix& m, int row, const std::vector<double>& vm,
                const std::vector<double>& va) {
    const int n = static_cast<int>(vm.size());
    for (int i = 0; i < n; ++i) {
        m(row, i) = (vm[static_cast<size_t>(i)] - 1.0) / 0.1;
        m(row, n + i) = va[static_cast<size_t>(i)] / 0.6;
    }
}

double spectral_norm_sq(const CMatrix& a) {
    // power iteration on A^H A
    std::vector<cx> x(static_cast<size_t>(a.n)), ax, aax;
    for (size_t i = 0; i < x.size(); ++i) x[i] = cx(1.0 + static_cast<double>(i % 3), 0.5);
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        cmatvec(a, x, ax);
        cmatvec_herm(a, ax, aax);
        double nrm = 0.0;
        for (const cx& v : aax) nrm += std::norm(v);
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        for (size_t i = 0; i < x.size(); ++i) x[i] = aax[i] / nrm;
        lambda = nrm;
    }
    return lambda; // ||A^H A x|| -> sigma_max^2 at convergence
}

} // namespace

TEST_CASE("complex voltage assembly") {
    auto v = to_complex_voltage({1.0, 1.0, 1.06}, {0.0, 1.5707963267948966, -0.1});
    REQUIRE(v[0].real() == 1.0);
    REQUIRE(v[0].imag() == 0.0);
    REQUIRE(v[1].real() == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(v[1].imag() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(v[2].real() == Catch::Approx(1.06 * std::cos(-0.1)));
    REQUIRE(v[2].imag() == Catch::Approx(1.06 * std::sin(-0.1)));
    REQUIRE_THROWS_AS(to_complex_voltage({1.0}, {0.0, 0.0}), contract_error);
}

TEST_CASE("data term basics") {
    std::vector<cx> truth{cx(1.0, 0.0), cx(0.9, -0.2)};
    REQUIRE(loss_data(truth, truth) == 0.0);

    std::vector<cx> est{cx(1.3, 0.4)};
    std::vector<cx> tru{cx(1.0, 0.0)};
    REQUIRE(loss_data(est, tru) == Catch::Approx(0.25).epsilon(1e-12));

    // modulus invariance under a common rotation
    cx rot = std::polar(1.0, 0.7);
    std::vector<cx> est2{est[0] * rot};
    std::vector<cx> tru2{tru[0] * rot};
    REQUIRE(loss_data(est2, tru2) == Catch::Approx(loss_data(est, tru)).epsilon(1e-12));

    REQUIRE_THROWS_AS(loss_data(est, truth), contract_error);
}

TEST_CASE("physics term on the two-bus line") {
    auto ctx = make_physics_context(two_bus_y(), true);
    std::vector<cx> tru{cx(1.0, 0.0), cx(1.0, 0.0)};
    std::vector<cx> est{cx(1.01, 0.0), cx(1.0, 0.0)};
    REQUIRE(loss_physics(tru, tru, ctx) == 0.0);
    REQUIRE(loss_physics(est, tru, ctx) == Catch::Approx(0.01).epsilon(1e-12));

    // a real difference has the same current magnitude under either convention
    auto raw = make_physics_context(two_bus_y(), false);
    REQUIRE(loss_physics(est, tru, raw) == Catch::Approx(0.01).epsilon(1e-12));

    CMatrix zero(2);
    auto degenerate = make_physics_context(zero, true);
    REQUIRE(loss_physics(est, tru, degenerate) == 0.0);

    std::vector<cx> three{cx(1, 0), cx(1, 0), cx(1, 0)};
    REQUIRE_THROWS_AS(loss_physics(three, three, ctx), contract_error);
}

TEST_CASE("constants term") {
    ConstantsSpec cs;
    REQUIRE(loss_constants({1.0, 1.0}, {0.0, 0.1}, cs) == 0.0);
    cs.entries.push_back({1, Quantity::Vm, 1.06});
    REQUIRE(loss_constants({1.06, 1.0}, {0.0, 0.1}, cs) == 0.0);
    REQUIRE(loss_constants({1.05, 1.0}, {0.0, 0.1}, cs) == Catch::Approx(1e-4).epsilon(1e-9));
    cs.entries.push_back({5, Quantity::Va, 0.0});
    REQUIRE_THROWS_AS(loss_constants({1.0, 1.0}, {0.0, 0.0}, cs), contract_error);
}

TEST_CASE("constants population from a case") {
    auto gc = grid::load_case(repo_path("data/cases/ieee14.case"));
    auto steady = make_constants(gc, true);
    auto transient = make_constants(gc, false);
    REQUIRE(transient.entries.size() == 2); // slack vm + va
    REQUIRE(steady.entries.size() == 2 + 4); // plus PV setpoints at 2,3,6,8
    REQUIRE(steady.entries[0].bus == 1);
    REQUIRE(steady.entries[0].value == 1.06);
    REQUIRE(steady.entries[1].q == Quantity::Va);
    REQUIRE(steady.entries[1].value == 0.0);
}

TEST_CASE("weight validation") {
    LossWeights ok{0.2, 0.7, 0.1};
    ok.validate();
    REQUIRE_THROWS_AS((LossWeights{0.5, 0.5, 0.5}.validate()), contract_error);
    REQUIRE_THROWS_AS((LossWeights{1.2, -0.2, 0.0}.validate()), contract_error);
    REQUIRE(combine(LossWeights{0.2, 0.7, 0.1}, 1.0, 2.0, 3.0) ==
            Catch::Approx(1.9).epsilon(1e-12));
}

TEST_CASE("composite loss vanishes at ground truth") {
    auto meta = plain_meta(2);
    auto ctx = make_physics_context(two_bus_y(), true, meta);
    ConstantsSpec cs;
    cs.entries.push_back({1, Quantity::Vm, 1.02});
    cs.entries.push_back({1, Quantity::Va, 0.0});

    Matrix T(3, 4);
    fill_state(T, 0, {1.02, 0.97}, {0.0, -0.12});
    fill_state(T, 1, {1.02, 1.01}, {0.0, 0.04});
    fill_state(T, 2, {1.02, 0.95}, {0.0, -0.3});
    Matrix U = T;

    auto terms = evaluate_loss(U, T, LossWeights{0.2, 0.7, 0.1}, ctx, cs);
    REQUIRE(terms.d == 0.0);
    REQUIRE(terms.p == 0.0);
    REQUIRE(terms.c == 0.0);
    REQUIRE(terms.total == 0.0);
}

TEST_CASE("pure data weights reproduce the complex-voltage mse exactly") {
    auto meta = plain_meta(2);
    auto ctx = make_physics_context(two_bus_y(), true, meta);
    ConstantsSpec cs;
    Matrix T(2, 4), U(2, 4);
    fill_state(T, 0, {1.0, 0.98}, {0.0, -0.1});
    fill_state(T, 1, {1.01, 0.99}, {0.02, -0.2});
    fill_state(U, 0, {1.03, 0.96}, {0.01, -0.14});
    fill_state(U, 1, {0.99, 1.02}, {-0.02, -0.16});

    auto terms = evaluate_loss(U, T, LossWeights{1.0, 0.0, 0.0}, ctx, cs);
    REQUIRE(terms.total == terms.d);

    // recompute d independently sample by sample
    double want = 0.0;
    for (int b = 0; b < 2; ++b) {
        std::vector<double> vme, vae, vmt, vat;
        forge::invert_targets(meta, U.row(b), vme, vae);
        forge::invert_targets(meta, T.row(b), vmt, vat);
        want += loss_data(to_complex_voltage(vme, vae), to_complex_voltage(vmt, vat)) / 2.0;
    }
    REQUIRE(terms.d == Catch::Approx(want).epsilon(1e-15));
}

TEST_CASE("terms are weight-independent and the total is their affine combination") {
    auto meta = plain_meta(2);
    auto ctx = make_physics_context(two_bus_y(), true, meta);
    auto cs = ConstantsSpec{{{1, Quantity::Vm, 1.0}}};
    Matrix T(2, 4), U(2, 4);
    fill_state(T, 0, {1.0, 0.98}, {0.0, -0.1});
    fill_state(T, 1, {1.01, 0.99}, {0.02, -0.2});
    fill_state(U, 0, {1.05, 0.94}, {0.03, -0.2});
    fill_state(U, 1, {0.97, 1.03}, {-0.04, -0.12});

    auto a = evaluate_loss(U, T, LossWeights{1.0, 0.0, 0.0}, ctx, cs);
    auto b = evaluate_loss(U, T, LossWeights{0.0, 1.0, 0.0}, ctx, cs);
    auto c = evaluate_loss(U, T, LossWeights{0.2, 0.7, 0.1}, ctx, cs);
    REQUIRE(a.d == b.d);
    REQUIRE(a.p == c.p);
    REQUIRE(a.c == c.c);
    REQUIRE(a.total == a.d);
    REQUIRE(b.total == b.p);
    REQUIRE(c.total == combine(LossWeights{0.2, 0.7, 0.1}, c.d, c.p, c.c));
}

TEST_CASE("physics term is bounded by the operator norm times the data term") {
    auto gc = grid::load_case(repo_path("data/cases/ieee14.case"));
    auto meta = plain_meta(14);
    auto ctx = make_physics_context(grid::build_ybus(gc), true, meta);
    double bound = spectral_norm_sq(ctx.y_op);

    auto eng = make_engine(301, "bound");
    Matrix U(8, 28), T(8, 28);
    for (double& v : U.a) v = uniform_in(eng, -1.0, 1.0);
    for (double& v : T.a) v = uniform_in(eng, -1.0, 1.0);
    auto terms = evaluate_loss(U, T, LossWeights{0.5, 0.5, 0.0}, ctx, ConstantsSpec{});
    REQUIRE(terms.p > 0.0);
    REQUIRE(terms.p <= bound * terms.d * (1.0 + 1e-9));
}

TEST_CASE("loss gradients match finite differences across the simplex") {
    auto gc = grid::load_case(repo_path("data/cases/ieee14.case"));
    struct Setup {
        CMatrix y;
        int n;
    };
    std::vector<Setup> setups;
    setups.push_back({two_bus_y(), 2});
    setups.push_back({grid::build_ybus(gc).y, 14});

    std::vector<LossWeights> lambdas = {{1.0, 0.0, 0.0},
                                        {0.0, 1.0, 0.0},
                                        {0.0, 0.0, 1.0},
                                        {0.2, 0.7, 0.1}};

    for (const auto& su : setups) {
        auto meta = plain_meta(su.n);
        for (bool conj_flag : {true, false}) {
            auto ctx = make_physics_context(su.y, conj_flag, meta);
            ConstantsSpec cs;
            cs.entries.push_back({1, Quantity::Vm, 1.01});
            cs.entries.push_back({1, Quantity::Va, 0.0});
            if (su.n == 14) cs.entries.push_back({6, Quantity::Vm, 1.07});

            auto eng = make_engine(777, "grad", static_cast<uint64_t>(su.n), conj_flag ? 1 : 0);
            Matrix U(3, 2 * su.n), T(3, 2 * su.n);
            for (double& v : U.a) v = uniform_in(eng, -0.9, 0.9);
            for (double& v : T.a) v = uniform_in(eng, -0.9, 0.9);

            for (const auto& w : lambdas) {
                Matrix dU;
                auto base = evaluate_loss(U, T, w, ctx, cs, &dU);
                REQUIRE(std::isfinite(base.total));
                const double h = 1e-5;
                for (size_t k = 0; k < U.a.size(); k += 5) {
                    double orig = U.a[k];
                    U.a[k] = orig + h;
                    double up = evaluate_loss(U, T, w, ctx, cs).total;
                    U.a[k] = orig - h;
                    double dn = evaluate_loss(U, T, w, ctx, cs).total;
                    U.a[k] = orig;
                    double fd = (up - dn) / (2.0 * h);
                    REQUIRE(std::abs(fd - dU.a[k]) <=
                            1e-5 * std::max(1.0, std::abs(dU.a[k])));
                }
            }
        }
    }
}

TEST_CASE("physics gradient equals the direct operator formula") {
    auto meta = plain_meta(2);
    auto ctx = make_physics_context(two_bus_y(), true, meta);
    Matrix U(1, 4), T(1, 4);
    fill_state(T, 0, {1.0, 0.98}, {0.0, -0.1});
    fill_state(U, 0, {1.04, 0.95}, {0.02, -0.17});

    Matrix dU;
    evaluate_loss(U, T, LossWeights{0.0, 1.0, 0.0}, ctx, ConstantsSpec{}, &dU);

    std::vector<double> vme, vae, vmt, vat;
    forge::invert_targets(meta, U.row(0), vme, vae);
    forge::invert_targets(meta, T.row(0), vmt, vat);
    auto v_est = to_complex_voltage(vme, vae);
    auto v_true = to_complex_voltage(vmt, vat);
    std::vector<cx> u{v_est[0] - v_true[0], v_est[1] - v_true[1]}, au, g;
    cmatvec(ctx.y_op, u, au);
    cmatvec_herm(ctx.y_op, au, g);
    for (int i = 0; i < 2; ++i) {
        const size_t si = static_cast<size_t>(i);
        double dvm = std::real(std::conj(g[si]) * std::polar(1.0, vae[si]));
        double dva = std::real(std::conj(g[si]) * cx(0.0, 1.0) * v_est[si]);
        // (2/n) = 1 here; remaining factors are the target inverse slopes.
        REQUIRE(dU(0, i) == Catch::Approx(dvm * 0.1).epsilon(1e-12));
        REQUIRE(dU(0, 2 + i) == Catch::Approx(dva * 0.6).epsilon(1e-12));
    }
}

TEST_CASE("composite loss rejects malformed shapes and weights") {
    auto meta = plain_meta(2);
    auto ctx = make_physics_context(two_bus_y(), true, meta);
    Matrix U(2, 4), T(2, 4), W(2, 6);
    ConstantsSpec none;
    REQUIRE_THROWS_AS(evaluate_loss(U, W, LossWeights{1, 0, 0}, ctx, none), contract_error);
    REQUIRE_THROWS_AS(evaluate_loss(W, W, LossWeights{1, 0, 0}, ctx, none), contract_error);
    REQUIRE_THROWS_AS(evaluate_loss(U, T, LossWeights{0.5, 0.4, 0.2}, ctx, none), contract_error);
    ConstantsSpec bad;
    bad.entries.push_back({7, Quantity::Vm, 1.0});
    REQUIRE_THROWS_AS(evaluate_loss(U, T, LossWeights{1, 0, 0}, ctx, bad), contract_error);
}
