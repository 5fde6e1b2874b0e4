#pragma once

#include <vector>

#include "pinnse/dataset.hpp"
#include "pinnse/errors.hpp"

namespace pinnse::forge {

struct AttackSegment {
    int count = 0;
    double beta = 0.0; // bias fraction, measurement multiplied by (1 + beta)

    bool operator==(const AttackSegment&) const = default;
};

struct AttackSpec {
    int target_bus = 0;
    bool on_p = true, on_q = true;
    std::vector<AttackSegment> schedule; // must span the whole test set

    bool operator==(const AttackSpec&) const = default;
};

// Stepped bias: 10% over the first third, 20% over the second, 30% over the rest.
inline std::vector<AttackSegment> default_attack_schedule(int n_points) {
    if (n_points <= 0) throw contract_error("attack schedule needs a positive span");
    int third = n_points / 3;
    return {{third, 0.10}, {third, 0.20}, {n_points - 2 * third, 0.30}};
}

inline void validate_attack(const AttackSpec& atk, int n_bus, int n_points) {
    if (atk.target_bus < 1 || atk.target_bus > n_bus)
        throw contract_error("attack target bus " + std::to_string(atk.target_bus) +
                             " not in case");
    int span = 0;
    for (const auto& seg : atk.schedule) {
        if (seg.count < 0 || seg.beta < 0.0)
            throw contract_error("attack schedule entries must be non-negative");
        span += seg.count;
    }
    if (span != n_points)
        throw contract_error("attack schedule spans " + std::to_string(span) + " points, dataset has " +
                             std::to_string(n_points));
}

inline Dataset apply_attack(const Dataset& ds, const AttackSpec& atk) {
    validate_attack(atk, ds.n_bus, ds.size());
    Dataset out = ds;
    const size_t bi = static_cast<size_t>(atk.target_bus - 1);
    int idx = 0;
    for (const auto& seg : atk.schedule) {
        for (int k = 0; k < seg.count; ++k, ++idx) {
            auto& s = out.samples[static_cast<size_t>(idx)];
            if (atk.on_p) s.p[bi] *= 1.0 + seg.beta;
            if (atk.on_q) s.q[bi] *= 1.0 + seg.beta;
        }
    }
    return out;
}

} // namespace pinnse::forge
