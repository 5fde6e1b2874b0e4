#pragma once

#include <complex>

#include "pinnse/errors.hpp"
#include "pinnse/grid.hpp"
#include "pinnse/matrix.hpp"

namespace pinnse::grid {

// Dense complex admittance matrix. 118 buses is small enough that sparse
// storage buys nothing here.
struct AdmittanceMatrix {
    CMatrix y;

    int n() const { return y.n; }
    cx operator()(int i, int j) const { return y(i, j); }
    double g(int i, int j) const { return y(i, j).real(); }
    double b(int i, int j) const { return y(i, j).imag(); }
};

// Standard branch stamping: series y = 1/(r+jx), charging split b/2 per end,
// off-nominal tap on the from side, bus shunts on the diagonal. Stamping
// order is the branch list order followed by the bus list, so repeated
// assembly is bitwise identical.
inline AdmittanceMatrix build_ybus(const GridCase& gc) {
    const int n = gc.n();
    CMatrix y(n);
    for (const auto& br : gc.branches) {
        if (br.r == 0.0 && br.x == 0.0)
            throw validation_error("branch " + std::to_string(br.from_bus) + "-" +
                                   std::to_string(br.to_bus) + ": zero impedance is singular");
        const cx ys = 1.0 / cx(br.r, br.x);
        const cx ysh(0.0, br.b_charging / 2.0);
        const double t = br.tap;
        const int f = gc.bus_index(br.from_bus);
        const int to = gc.bus_index(br.to_bus);
        y(f, f) += (ys + ysh) / (t * t);
        y(to, to) += ys + ysh;
        y(f, to) += -ys / t;
        y(to, f) += -ys / t;
    }
    for (int i = 0; i < n; ++i) {
        const Bus& b = gc.buses[static_cast<size_t>(i)];
        y(i, i) += cx(b.shunt_g, b.shunt_b);
    }
    return AdmittanceMatrix{std::move(y)};
}

} // namespace pinnse::grid
