#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pinnse/attack.hpp"
#include "pinnse/errors.hpp"
#include "pinnse/grid.hpp"
#include "pinnse/kvconfig.hpp"

namespace pinnse::forge {

enum class RecipeKind { Daily, SubsetOfTrain, Shutdown, LoadDelta, Ramp, Fault };

inline std::string to_string(RecipeKind k) {
    switch (k) {
    case RecipeKind::Daily: return "daily";
    case RecipeKind::SubsetOfTrain: return "subset_of_train";
    case RecipeKind::Shutdown: return "shutdown";
    case RecipeKind::LoadDelta: return "load_delta";
    case RecipeKind::Ramp: return "ramp";
    case RecipeKind::Fault: return "fault";
    }
    throw contract_error("unknown recipe kind");
}

inline RecipeKind recipe_kind_from(const std::string& s) {
    if (s == "daily") return RecipeKind::Daily;
    if (s == "subset_of_train") return RecipeKind::SubsetOfTrain;
    if (s == "shutdown") return RecipeKind::Shutdown;
    if (s == "load_delta") return RecipeKind::LoadDelta;
    if (s == "ramp") return RecipeKind::Ramp;
    if (s == "fault") return RecipeKind::Fault;
    throw config_error("unknown recipe kind '" + s + "'");
}

struct Recipe {
    RecipeKind kind = RecipeKind::Daily;
    double jitter = 0.02;          // daily: per-bus multiplicative load jitter sigma
    bool flat_curve = false;       // daily: pin the multiplier to 1.0
    int gen_bus = 0;               // shutdown / ramp
    double delta_mw = 0.0;         // load_delta / ramp magnitude
    std::vector<int> spread_buses; // load_delta: explicit per-bus split (P only)
    int fault_bus = 0;
    double r_fault = 0.0; // p.u.

    bool operator==(const Recipe&) const = default;
};

struct ScenarioSpec {
    std::string name;
    std::string case_path;
    Recipe train, test;
    int train_count = 800, val_count = 200, test_count = 100;
    double noise_level = 0.01;
    std::uint64_t seed = 1;
    bool has_attack = false;
    AttackSpec attack;

    bool operator==(const ScenarioSpec&) const = default;
};

inline void validate_recipe(const Recipe& r, const grid::GridCase& gc, bool is_test) {
    switch (r.kind) {
    case RecipeKind::Daily:
        if (r.jitter < 0.0) throw config_error("daily recipe: jitter must be >= 0");
        break;
    case RecipeKind::SubsetOfTrain:
        if (!is_test) throw config_error("subset_of_train is only valid as a test recipe");
        break;
    case RecipeKind::Shutdown: {
        const auto& b = gc.bus(r.gen_bus); // throws on unknown bus
        if (b.gen_p == 0.0) throw config_error("shutdown recipe: bus " + std::to_string(r.gen_bus) +
                                               " has no active generation");
        break;
    }
    case RecipeKind::LoadDelta:
        for (int id : r.spread_buses) gc.bus(id);
        if (r.delta_mw == 0.0 && r.spread_buses.empty())
            throw config_error("load_delta recipe: zero magnitude and no spread buses");
        break;
    case RecipeKind::Ramp:
        gc.bus(r.gen_bus);
        break;
    case RecipeKind::Fault:
        gc.bus(r.fault_bus);
        if (r.r_fault <= 0.0) throw config_error("fault recipe: resistance must be > 0");
        break;
    }
}

inline void validate_scenario(const ScenarioSpec& sp, const grid::GridCase& gc) {
    if (sp.train_count <= 0 || sp.val_count <= 0 || sp.test_count <= 0)
        throw config_error("scenario " + sp.name + ": sample counts must be > 0");
    if (sp.noise_level < 0.0) throw config_error("scenario " + sp.name + ": noise level must be >= 0");
    validate_recipe(sp.train, gc, false);
    if (sp.train.kind == RecipeKind::SubsetOfTrain)
        throw config_error("subset_of_train is only valid as a test recipe");
    validate_recipe(sp.test, gc, true);
    if (sp.has_attack) validate_attack(sp.attack, gc.n(), sp.test_count);
}

namespace detail {

inline Recipe parse_recipe(const KvConfig& cfg, const std::string& sec) {
    Recipe r;
    r.kind = recipe_kind_from(cfg.require_str(sec, "recipe"));
    r.jitter = cfg.get_double(sec, "jitter", 0.02);
    r.flat_curve = cfg.get_bool(sec, "flat_curve", false);
    r.gen_bus = cfg.get_int(sec, "gen_bus", 0);
    r.delta_mw = cfg.get_double(sec, "delta_mw", 0.0);
    if (cfg.has(sec, "spread_buses")) r.spread_buses = cfg.get_ints(sec, "spread_buses");
    r.fault_bus = cfg.get_int(sec, "fault_bus", 0);
    r.r_fault = cfg.get_double(sec, "r_fault", 0.0);
    return r;
}

} // namespace detail

inline ScenarioSpec parse_scenario(const KvConfig& cfg) {
    ScenarioSpec sp;
    sp.name = cfg.require_str("scenario", "name");
    sp.case_path = cfg.require_str("scenario", "case");
    sp.seed = static_cast<std::uint64_t>(cfg.get_long("scenario", "seed", 1));
    sp.noise_level = cfg.get_double("scenario", "noise", 0.01);
    sp.train_count = cfg.get_int("scenario", "train_count", 800);
    sp.val_count = cfg.get_int("scenario", "val_count", 200);
    sp.test_count = cfg.get_int("scenario", "test_count", 100);
    sp.train = detail::parse_recipe(cfg, "train");
    sp.test = detail::parse_recipe(cfg, "test");
    if (cfg.has_section("attack")) {
        sp.has_attack = true;
        sp.attack.target_bus = cfg.get_int("attack", "target_bus", 0);
        sp.attack.on_p = cfg.get_bool("attack", "on_p", true);
        sp.attack.on_q = cfg.get_bool("attack", "on_q", true);
        if (cfg.has("attack", "schedule")) {
            for (const auto& item : cfg.get_list("attack", "schedule")) {
                auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw config_error("attack schedule entries are count:beta, got '" + item + "'");
                AttackSegment seg;
                seg.count = std::stoi(item.substr(0, colon));
                seg.beta = std::stod(item.substr(colon + 1));
                sp.attack.schedule.push_back(seg);
            }
        } else {
            sp.attack.schedule = default_attack_schedule(sp.test_count);
        }
    }
    return sp;
}

inline ScenarioSpec load_scenario(const std::string& path) {
    return parse_scenario(KvConfig::load(path));
}

} // namespace pinnse::forge
