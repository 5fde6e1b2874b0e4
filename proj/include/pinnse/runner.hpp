#pragma once

#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pinnse/case_io.hpp"
#include "pinnse/evaluate.hpp"
#include "pinnse/forge.hpp"
#include "pinnse/hpo.hpp"
#include "pinnse/kvconfig.hpp"
#include "pinnse/scenario.hpp"
#include "pinnse/ybus.hpp"

namespace pinnse::bench {

struct HpoSettings {
    double step = 0.25;
    int trials = 4;
    hpo::ParamRanges ranges;
    int max_epochs = 100;
    int patience = 20;
};

struct FixedSettings {
    loss::LossWeights weights;
    hpo::TrialParams params;
    int max_epochs = 100;
    int patience = 20;
};

struct ExperimentConfig {
    std::string name;
    forge::ScenarioSpec scenario;
    bool use_hpo = true;
    HpoSettings sweep;
    FixedSettings fixed;
    std::vector<std::uint64_t> seeds;
    std::string out_dir = "runs";
    bool rank_on_validation = false;
    bool unconjugated_physics = false;

    void validate() const {
        if (seeds.empty()) throw config_error("experiment: at least one seed required");
        if (name.empty()) throw config_error("experiment: empty name");
        if (use_hpo) {
            try {
                sweep.ranges.validate();
                hpo::enumerate_weights(sweep.step);
            } catch (const contract_error& e) {
                throw config_error(std::string("experiment: ") + e.what());
            }
            if (sweep.trials < 1) throw config_error("experiment: trials must be >= 1");
        } else {
            try {
                fixed.weights.validate();
            } catch (const contract_error& e) {
                throw config_error(std::string("experiment: ") + e.what());
            }
        }
    }
};

namespace detail {

namespace fs = std::filesystem;

inline std::string resolve_near(const std::string& anchor_file, const std::string& path) {
    fs::path p(path);
    if (p.is_absolute() || anchor_file.empty()) return path;
    return (fs::path(anchor_file).parent_path() / p).string();
}

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline void recipe_fingerprint(std::string& out, const forge::Recipe& r) {
    out += forge::to_string(r.kind);
    out += '|' + fmt_g(r.jitter) + '|' + std::to_string(r.flat_curve);
    out += '|' + std::to_string(r.gen_bus) + '|' + fmt_g(r.delta_mw);
    for (int b : r.spread_buses) out += ',' + std::to_string(b);
    out += '|' + std::to_string(r.fault_bus) + '|' + fmt_g(r.r_fault);
}

// Content address for a generated dataset triple: the case text, every
// recipe knob, the counts, noise and attack schedule, and the seed.
inline std::string dataset_fingerprint(const std::string& case_text,
                                       const forge::ScenarioSpec& sp) {
    std::string s = case_text;
    s += '\n' + sp.name + '|';
    recipe_fingerprint(s, sp.train);
    s += ';';
    recipe_fingerprint(s, sp.test);
    s += ';' + std::to_string(sp.train_count) + '/' + std::to_string(sp.val_count) + '/' +
         std::to_string(sp.test_count);
    s += '|' + fmt_g(sp.noise_level) + '|' + std::to_string(sp.seed);
    if (sp.has_attack) {
        s += "|atk" + std::to_string(sp.attack.target_bus) + (sp.attack.on_p ? "P" : "") +
             (sp.attack.on_q ? "Q" : "");
        for (const auto& seg : sp.attack.schedule)
            s += ',' + std::to_string(seg.count) + ':' + fmt_g(seg.beta);
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

inline forge::ScenarioData cached_datasets(const std::string& cache_dir,
                                           const grid::GridCase& gc,
                                           const std::string& case_text,
                                           const forge::ScenarioSpec& sp, std::ostream& log) {
    const std::string key = dataset_fingerprint(case_text, sp);
    const std::string base = cache_dir + "/" + key;
    forge::ScenarioData data;
    if (fs::exists(base + ".train.csv") && fs::exists(base + ".val.csv") &&
        fs::exists(base + ".test.csv")) {
        data.train = forge::read_dataset(base + ".train.csv", gc.name);
        data.val = forge::read_dataset(base + ".val.csv", gc.name);
        data.test = forge::read_dataset(base + ".test.csv", gc.name);
        log << "  cache hit " << key << "\n";
        return data;
    }
    data = forge::make_scenario_datasets(gc, sp);
    fs::create_directories(cache_dir);
    forge::write_dataset(data.train, base + ".train.csv");
    forge::write_dataset(data.val, base + ".val.csv");
    forge::write_dataset(data.test, base + ".test.csv");
    log << "  generated " << key << "\n";
    return data;
}

inline std::string weights_label(const loss::LossWeights& w) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "d%.3g_p%.3g_c%.3g", w.lambda_d, w.lambda_p, w.lambda_c);
    return buf;
}

inline std::string points_csv(const MaeReport& rep, const forge::Dataset& ds) {
    std::string out = "t,mae\n";
    for (size_t i = 0; i < rep.per_test_point_mae.size(); ++i)
        out += fmt_g(ds.samples[i].t) + "," + fmt_g(rep.per_test_point_mae[i]) + "\n";
    return out;
}

inline std::string buses_csv(const MaeReport& rep) {
    std::string out = "bus,mae\n";
    for (size_t i = 0; i < rep.per_bus_mae.size(); ++i)
        out += std::to_string(i + 1) + "," + fmt_g(rep.per_bus_mae[i]) + "\n";
    return out;
}

inline std::string summary_csv(const MaeReport& pinn, const MaeReport& nn) {
    std::string out = "model,mean_mae,mean_mae_norm,attacked_bus_mae,training_time_s,"
                      "inference_time_ms,inference_std_ms\n";
    auto row = [&](const char* name, const MaeReport& r) {
        out += std::string(name) + "," + fmt_g(r.mean_mae) + "," + fmt_g(r.mean_mae_norm) + ",";
        if (r.has_attacked_bus) out += fmt_g(r.attacked_bus_mae);
        out += "," + fmt_g(r.training_time_s) + "," + fmt_g(r.inference_time_ms) + "," +
               fmt_g(r.inference_std_ms) + "\n";
    };
    row("pinn", pinn);
    row("nn", nn);
    return out;
}

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace detail

struct SeedOutcome {
    std::uint64_t seed = 0;
    hpo::Trial pinn, nn; // winning descriptors (weights, params, ranking MAE)
    nn::MlpModel pinn_model, nn_model;
    MaeReport pinn_test, nn_test, pinn_unseen, nn_unseen;
};

struct ScenarioOutcome {
    std::string dir;
    std::vector<SeedOutcome> seeds;
    std::vector<loss::LossWeights> combos; // sweep grid when HPO ran
    bool dry_run = false;
};

// The full per-scenario pipeline: datasets (cached), PINN via sweep or fixed
// weights, the λ=(1,0,0) NN baseline through the identical code path,
// evaluation on the scenario test set and on a fresh unseen draw from the
// training distribution, and CSV artifacts for every stage.
inline ScenarioOutcome run_scenario(const ExperimentConfig& cfg, std::ostream& log,
                                    bool dry_run = false) {
    namespace fs = std::filesystem;
    ScenarioOutcome out;

    // stage: config
    grid::GridCase gc;
    std::string case_text;
    try {
        cfg.validate();
        case_text = read_file(cfg.scenario.case_path);
        gc = grid::parse_case(case_text, fs::path(cfg.scenario.case_path).stem().string());
        forge::validate_scenario(cfg.scenario, gc);
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    out.dir = cfg.out_dir + "/" + cfg.name;
    if (dry_run) {
        out.dry_run = true;
        log << "dry run ok: " << cfg.name << " (" << gc.name << ", "
            << (cfg.use_hpo ? "hpo" : "fixed") << ", " << cfg.seeds.size() << " seed(s))\n";
        return out;
    }

    const auto ybus = grid::build_ybus(gc);
    const bool steady = cfg.scenario.train.kind == forge::RecipeKind::Daily;
    if (cfg.use_hpo) out.combos = hpo::enumerate_weights(cfg.sweep.step);

    fs::create_directories(out.dir);
    const std::string cache_dir = cfg.out_dir + "/cache";

    for (std::uint64_t seed : cfg.seeds) {
        SeedOutcome so;
        so.seed = seed;
        const std::string seed_dir = out.dir + "/seed_" + std::to_string(seed);
        fs::create_directories(seed_dir);
        log << "[" << cfg.name << "] seed " << seed << "\n";

        // stage: generation
        forge::ScenarioData data;
        forge::Dataset unseen;
        try {
            forge::ScenarioSpec sp = cfg.scenario;
            sp.seed = seed;
            data = detail::cached_datasets(cache_dir, gc, case_text, sp, log);

            forge::ScenarioSpec un = sp;
            un.test = sp.train;
            un.has_attack = false;
            un.seed = stream_key(seed, "unseen");
            un.train_count = 8; // only the test split of this variant is kept
            un.val_count = 8;
            unseen = detail::cached_datasets(cache_dir, gc, case_text, un, log).test;
        } catch (const std::exception& e) {
            throw generation_error(std::string("generation: ") + e.what());
        }

        // stage: training
        hpo::HpoProblem pb;
        try {
            pb.meta = forge::fit_norm(data.train);
            forge::apply_norm(pb.meta, data.train, pb.train.X, pb.train.T);
            forge::apply_norm(pb.meta, data.val, pb.val.X, pb.val.T);
            pb.test = data.test;
            pb.ctx = loss::make_physics_context(ybus.y, !cfg.unconjugated_physics, pb.meta);
            pb.constants = loss::make_constants(gc, steady);
            pb.rank_on_validation = cfg.rank_on_validation;

            nn::TrainResult pinn_res, nn_res;
            if (cfg.use_hpo) {
                pb.max_epochs = cfg.sweep.max_epochs;
                pb.patience = cfg.sweep.patience;
                std::ostringstream trials;
                hpo::HpoResult hr = hpo::optimize(pb, cfg.sweep.ranges, cfg.sweep.step,
                                                  cfg.sweep.trials, seed, &trials);
                write_file_atomic(seed_dir + "/trials.csv", trials.str());

                so.nn = hr.per_combination_best.at({1.0, 0.0, 0.0});
                bool have = false;
                for (const auto& [key, trial] : hr.per_combination_best) {
                    if (key == std::array<double, 3>{1.0, 0.0, 0.0}) continue;
                    if (!have || trial.mae < so.pinn.mae) {
                        so.pinn = trial;
                        have = true;
                    }
                }
                if (!have || so.pinn.failed || so.nn.failed)
                    throw training_error("no usable trial survived the sweep");

                // retrain the two winners; determinism makes this a replay
                hpo::run_trial(pb, so.pinn.params, so.pinn.weights,
                               hpo::trial_seed(seed, so.pinn.combo_id, so.pinn.trial_id),
                               &pinn_res);
                hpo::run_trial(pb, so.nn.params, so.nn.weights,
                               hpo::trial_seed(seed, so.nn.combo_id, so.nn.trial_id), &nn_res);

                // epoch curves per combination (validation MAE per epoch)
                std::string curves = "epoch";
                size_t max_ep = 0;
                for (const auto& w : out.combos) {
                    curves += "," + detail::weights_label(w);
                    const auto& t = hr.per_combination_best.at(hpo::weight_key(w));
                    max_ep = std::max(max_ep, t.report.epoch_val_mae.size());
                }
                curves += "\n";
                for (size_t e = 0; e < max_ep; ++e) {
                    curves += std::to_string(e + 1);
                    for (const auto& w : out.combos) {
                        const auto& t = hr.per_combination_best.at(hpo::weight_key(w));
                        curves += ",";
                        if (e < t.report.epoch_val_mae.size())
                            curves += detail::fmt_g(t.report.epoch_val_mae[e]);
                    }
                    curves += "\n";
                }
                write_file_atomic(seed_dir + "/epoch_curves.csv", curves);

                std::string heat = "lambda_d,lambda_p,lambda_c,mae\n";
                for (const auto& w : out.combos) {
                    const auto& t = hr.per_combination_best.at(hpo::weight_key(w));
                    heat += detail::fmt_g(w.lambda_d) + "," + detail::fmt_g(w.lambda_p) + "," +
                            detail::fmt_g(w.lambda_c) + "," + detail::fmt_g(t.mae) + "\n";
                }
                write_file_atomic(seed_dir + "/heatmap.csv", heat);
            } else {
                pb.max_epochs = cfg.fixed.max_epochs;
                pb.patience = cfg.fixed.patience;
                const std::uint64_t ts = hpo::trial_seed(seed, 0, 0);
                so.pinn.params = cfg.fixed.params;
                so.pinn.weights = cfg.fixed.weights;
                so.pinn.mae = hpo::run_trial(pb, cfg.fixed.params, cfg.fixed.weights, ts,
                                             &pinn_res);
                so.nn.params = cfg.fixed.params;
                so.nn.weights = {1.0, 0.0, 0.0};
                so.nn.mae = hpo::run_trial(pb, cfg.fixed.params, so.nn.weights, ts, &nn_res);

                std::string curves = "epoch,pinn,nn\n";
                const size_t max_ep = std::max(pinn_res.report.epoch_val_mae.size(),
                                               nn_res.report.epoch_val_mae.size());
                for (size_t e = 0; e < max_ep; ++e) {
                    curves += std::to_string(e + 1) + ",";
                    if (e < pinn_res.report.epoch_val_mae.size())
                        curves += detail::fmt_g(pinn_res.report.epoch_val_mae[e]);
                    curves += ",";
                    if (e < nn_res.report.epoch_val_mae.size())
                        curves += detail::fmt_g(nn_res.report.epoch_val_mae[e]);
                    curves += "\n";
                }
                write_file_atomic(seed_dir + "/epoch_curves.csv", curves);
            }
            so.pinn.report = pinn_res.report;
            so.nn.report = nn_res.report;
            so.pinn_model = std::move(pinn_res.model);
            so.nn_model = std::move(nn_res.model);
        } catch (const training_error&) {
            throw;
        } catch (const std::exception& e) {
            throw training_error(std::string("training: ") + e.what());
        }

        // stage: evaluation
        try {
            const forge::AttackSpec* atk =
                cfg.scenario.has_attack ? &cfg.scenario.attack : nullptr;
            so.pinn_test = evaluate(so.pinn_model, data.test, pb.meta, atk);
            so.nn_test = evaluate(so.nn_model, data.test, pb.meta, atk);
            so.pinn_unseen = evaluate(so.pinn_model, unseen, pb.meta);
            so.nn_unseen = evaluate(so.nn_model, unseen, pb.meta);

            Matrix probe, tdummy;
            forge::apply_norm(pb.meta, data.test, probe, tdummy);
            auto pc = measure_costs(so.pinn_model, probe, 1000, so.pinn.report.wall_time_s);
            auto nc = measure_costs(so.nn_model, probe, 1000, so.nn.report.wall_time_s);
            auto put = [](MaeReport& r, const CostReport& c) {
                r.training_time_s = c.training_time_s;
                r.inference_time_ms = c.inference_mean_ms;
                r.inference_std_ms = c.inference_std_ms;
            };
            put(so.pinn_test, pc);
            put(so.pinn_unseen, pc);
            put(so.nn_test, nc);
            put(so.nn_unseen, nc);

            nn::save_model(so.pinn_model, seed_dir + "/pinn_model.txt");
            nn::save_model(so.nn_model, seed_dir + "/nn_model.txt");
            write_file_atomic(seed_dir + "/norm.cfg",
                              forge::norm_meta_to_config(pb.meta).dump());
            write_file_atomic(seed_dir + "/pinn_test_points.csv",
                              detail::points_csv(so.pinn_test, data.test));
            write_file_atomic(seed_dir + "/nn_test_points.csv",
                              detail::points_csv(so.nn_test, data.test));
            write_file_atomic(seed_dir + "/pinn_unseen_points.csv",
                              detail::points_csv(so.pinn_unseen, unseen));
            write_file_atomic(seed_dir + "/nn_unseen_points.csv",
                              detail::points_csv(so.nn_unseen, unseen));
            write_file_atomic(seed_dir + "/pinn_test_buses.csv",
                              detail::buses_csv(so.pinn_test));
            write_file_atomic(seed_dir + "/nn_test_buses.csv", detail::buses_csv(so.nn_test));
            write_file_atomic(seed_dir + "/summary.csv",
                              detail::summary_csv(so.pinn_test, so.nn_test));

            KvConfig choice;
            auto put_choice = [&](const std::string& sec, const hpo::Trial& t) {
                choice.set(sec, "lambda_d", detail::fmt_g(t.weights.lambda_d));
                choice.set(sec, "lambda_p", detail::fmt_g(t.weights.lambda_p));
                choice.set(sec, "lambda_c", detail::fmt_g(t.weights.lambda_c));
                choice.set(sec, "layers", std::to_string(t.params.layers));
                choice.set(sec, "neurons", std::to_string(t.params.neurons));
                choice.set(sec, "lr", detail::fmt_g(t.params.lr));
                choice.set(sec, "batch", std::to_string(t.params.batch));
                choice.set(sec, "mae", detail::fmt_g(t.mae));
                choice.set(sec, "combo_id", std::to_string(t.combo_id));
                choice.set(sec, "trial_id", std::to_string(t.trial_id));
            };
            put_choice("pinn", so.pinn);
            put_choice("nn", so.nn);
            write_file_atomic(seed_dir + "/choice.cfg", choice.dump());
        } catch (const std::exception& e) {
            throw training_error(std::string("evaluation: ") + e.what());
        }

        log << "  pinn " << detail::weights_label(so.pinn.weights) << " test mae "
            << so.pinn_test.mean_mae << " | nn test mae " << so.nn_test.mean_mae << "\n";
        out.seeds.push_back(std::move(so));
    }

    // cross-seed comparison
    const bool atk = cfg.scenario.has_attack;
    std::string cmp = "seed,pinn_test_mae,nn_test_mae,pinn_unseen_mae,nn_unseen_mae";
    if (atk) cmp += ",pinn_attacked_mae,nn_attacked_mae";
    cmp += "\n";
    std::vector<double> pt, nt, pu, nu, pa, na;
    for (const auto& so : out.seeds) {
        cmp += std::to_string(so.seed) + "," + detail::fmt_g(so.pinn_test.mean_mae) + "," +
               detail::fmt_g(so.nn_test.mean_mae) + "," + detail::fmt_g(so.pinn_unseen.mean_mae) +
               "," + detail::fmt_g(so.nn_unseen.mean_mae);
        pt.push_back(so.pinn_test.mean_mae);
        nt.push_back(so.nn_test.mean_mae);
        pu.push_back(so.pinn_unseen.mean_mae);
        nu.push_back(so.nn_unseen.mean_mae);
        if (atk) {
            cmp += "," + detail::fmt_g(so.pinn_test.attacked_bus_mae) + "," +
                   detail::fmt_g(so.nn_test.attacked_bus_mae);
            pa.push_back(so.pinn_test.attacked_bus_mae);
            na.push_back(so.nn_test.attacked_bus_mae);
        }
        cmp += "\n";
    }
    auto stat_row = [&](const char* tag, double (*f)(std::vector<double>)) {
        cmp += std::string(tag) + "," + detail::fmt_g(f(pt)) + "," + detail::fmt_g(f(nt)) + "," +
               detail::fmt_g(f(pu)) + "," + detail::fmt_g(f(nu));
        if (atk) cmp += "," + detail::fmt_g(f(pa)) + "," + detail::fmt_g(f(na));
        cmp += "\n";
    };
    stat_row("median", [](std::vector<double> v) { return detail::median_of(std::move(v)); });
    stat_row("min", [](std::vector<double> v) {
        return *std::min_element(v.begin(), v.end());
    });
    stat_row("max", [](std::vector<double> v) {
        return *std::max_element(v.begin(), v.end());
    });
    write_file_atomic(out.dir + "/comparison.csv", cmp);
    return out;
}

inline ExperimentConfig parse_experiment(const KvConfig& cfg, const std::string& origin) {
    ExperimentConfig ec;
    if (!cfg.has_section("experiment")) throw config_error(origin + ": missing [experiment]");
    const std::string scen = cfg.require_str("experiment", "scenario");
    const std::string scen_path = detail::resolve_near(origin, scen);
    ec.scenario = forge::load_scenario(scen_path);
    ec.scenario.case_path = detail::resolve_near(scen_path, ec.scenario.case_path);
    ec.name = cfg.get_str("experiment", "name", ec.scenario.name);

    const std::string mode = cfg.get_str("experiment", "mode", "hpo");
    if (mode == "hpo")
        ec.use_hpo = true;
    else if (mode == "fixed")
        ec.use_hpo = false;
    else
        throw config_error(origin + ": mode must be hpo or fixed");

    for (const auto& s : cfg.get_list("experiment", "seeds"))
        ec.seeds.push_back(static_cast<std::uint64_t>(std::stoull(s)));
    if (ec.seeds.empty()) ec.seeds.push_back(1);
    ec.out_dir = cfg.get_str("experiment", "out", ec.out_dir);
    ec.rank_on_validation = cfg.get_bool("experiment", "rank_on_validation", false);
    ec.unconjugated_physics = cfg.get_bool("experiment", "unconjugated_physics", false);

    if (ec.use_hpo) {
        HpoSettings& h = ec.sweep;
        h.step = cfg.get_double("hpo", "step", h.step);
        h.trials = cfg.get_int("hpo", "trials", h.trials);
        auto pair_int = [&](const char* key, int& lo, int& hi) {
            if (!cfg.has("hpo", key)) return;
            auto v = cfg.get_ints("hpo", key);
            if (v.size() != 2) throw config_error(origin + ": hpo." + key + " wants two values");
            lo = v[0];
            hi = v[1];
        };
        pair_int("layers", h.ranges.layers_lo, h.ranges.layers_hi);
        pair_int("neurons", h.ranges.neurons_lo, h.ranges.neurons_hi);
        pair_int("batch", h.ranges.batch_lo, h.ranges.batch_hi);
        if (cfg.has("hpo", "lr")) {
            auto v = cfg.get_doubles("hpo", "lr");
            if (v.size() != 2) throw config_error(origin + ": hpo.lr wants two values");
            h.ranges.lr_lo = v[0];
            h.ranges.lr_hi = v[1];
        }
        h.max_epochs = cfg.get_int("hpo", "max_epochs", h.max_epochs);
        h.patience = cfg.get_int("hpo", "patience", h.patience);
    } else {
        FixedSettings& f = ec.fixed;
        f.weights.lambda_d = cfg.require_double("fixed", "lambda_d");
        f.weights.lambda_p = cfg.require_double("fixed", "lambda_p");
        f.weights.lambda_c = cfg.require_double("fixed", "lambda_c");
        f.params.layers = cfg.get_int("fixed", "layers", f.params.layers);
        f.params.neurons = cfg.get_int("fixed", "neurons", f.params.neurons);
        f.params.lr = cfg.get_double("fixed", "lr", f.params.lr);
        f.params.batch = cfg.get_int("fixed", "batch", f.params.batch);
        f.max_epochs = cfg.get_int("fixed", "max_epochs", f.max_epochs);
        f.patience = cfg.get_int("fixed", "patience", f.patience);
    }
    ec.validate();
    return ec;
}

inline ExperimentConfig load_experiment(const std::string& path) {
    return parse_experiment(KvConfig::load(path), path);
}

} // namespace pinnse::bench
