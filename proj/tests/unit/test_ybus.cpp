#include <cmath>
#include <set>

#include "helpers.hpp"
#include "pinnse/case_io.hpp"
#include "pinnse/ybus.hpp"

using namespace pinnse;
using namespace pinnse::grid;

static GridCase make_two_bus(double r, double x, double b = 0.0) {
    GridCase gc;
    gc.name = "t";
    gc.base_mva = 100.0;
    gc.buses = {Bus{1, BusKind::Slack, 0, 0, 0, 1.0, 0, 0}, Bus{2, BusKind::PQ, 0, 0, 0, 1.0, 0, 0}};
    gc.branches = {Branch{1, 2, r, x, b, 1.0}};
    return gc;
}

TEST_CASE("pure reactance branch stamps +-10j") {
    auto y = build_ybus(make_two_bus(0.0, 0.1));
    REQUIRE(y(0, 0) == cx(0.0, -10.0));
    REQUIRE(y(1, 1) == cx(0.0, -10.0));
    REQUIRE(y(0, 1) == cx(0.0, 10.0));
    REQUIRE(y(1, 0) == cx(0.0, 10.0));
}

TEST_CASE("single isolated bus yields a zero matrix") {
    GridCase gc;
    gc.name = "one";
    gc.buses = {Bus{1, BusKind::Slack, 0, 0, 0, 1.0, 0, 0}};
    auto y = build_ybus(gc);
    REQUIRE(y.n() == 1);
    REQUIRE(y(0, 0) == cx(0.0, 0.0));
}

TEST_CASE("zero-impedance branch is a singular-branch error") {
    GridCase gc = make_two_bus(0.0, 0.1);
    gc.branches[0].x = 0.0;
    REQUIRE_THROWS_AS(build_ybus(gc), validation_error);
}

TEST_CASE("14-bus sparsity pattern equals branch adjacency") {
    GridCase gc = load_case(repo_path("data/cases/ieee14.case"));
    auto y = build_ybus(gc);
    std::set<std::pair<int, int>> adj;
    for (const auto& br : gc.branches) {
        adj.insert({br.from_bus - 1, br.to_bus - 1});
        adj.insert({br.to_bus - 1, br.from_bus - 1});
    }
    for (int i = 0; i < y.n(); ++i) {
        for (int j = 0; j < y.n(); ++j) {
            if (i == j) continue;
            bool connected = adj.count({i, j}) > 0;
            bool nonzero = y(i, j) != cx(0.0, 0.0);
            INFO("entry " << i + 1 << "," << j + 1);
            REQUIRE(connected == nonzero);
        }
    }
}

TEST_CASE("unity-tap assembly is bitwise symmetric") {
    GridCase gc = load_case(repo_path("data/cases/ieee14.case"));
    for (auto& br : gc.branches) br.tap = 1.0;
    auto y = build_ybus(gc);
    for (int i = 0; i < y.n(); ++i)
        for (int j = i + 1; j < y.n(); ++j) REQUIRE(y(i, j) == y(j, i));
}

TEST_CASE("charging susceptance lands on the diagonal") {
    auto y0 = build_ybus(make_two_bus(0.0, 0.1, 0.0));
    auto yb = build_ybus(make_two_bus(0.0, 0.1, 0.04));
    REQUIRE(std::abs(yb(0, 0) - y0(0, 0) - cx(0.0, 0.02)) < 1e-15);
    REQUIRE(std::abs(yb(1, 1) - y0(1, 1) - cx(0.0, 0.02)) < 1e-15);
    REQUIRE(yb(0, 1) == y0(0, 1));
}

TEST_CASE("impedance scaling inverts off-diagonal magnitude") {
    GridCase gc = load_case(repo_path("data/cases/ieee14.case"));
    for (auto& b : gc.buses) { b.shunt_g = 0.0; b.shunt_b = 0.0; }
    for (auto& br : gc.branches) br.b_charging = 0.0;
    auto y1 = build_ybus(gc);
    const double s = 2.0;
    GridCase scaled = gc;
    for (auto& br : scaled.branches) { br.r *= s; br.x *= s; }
    auto y2 = build_ybus(scaled);
    for (int i = 0; i < y1.n(); ++i) {
        for (int j = 0; j < y1.n(); ++j) {
            if (i == j) continue;
            REQUIRE(std::abs(y2(i, j) - y1(i, j) / s) < 1e-14);
        }
    }
}

TEST_CASE("transformer tap divides the from-side diagonal") {
    GridCase gc = make_two_bus(0.0, 0.2);
    gc.branches[0].tap = 0.5;
    auto y = build_ybus(gc);
    // y_series = -5j; from diagonal: y/t^2 = -20j; off-diagonal: -y/t = +10j
    REQUIRE(y(0, 0) == cx(0.0, -20.0));
    REQUIRE(y(1, 1) == cx(0.0, -5.0));
    REQUIRE(y(0, 1) == cx(0.0, 10.0));
    REQUIRE(y(1, 0) == cx(0.0, 10.0));
}
