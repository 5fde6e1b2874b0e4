#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include "pinnse/csv.hpp"
#include "pinnse/errors.hpp"

namespace pinnse::forge {

// One time step: raw physical measurements (p.u.) and the true state.
struct Sample {
    double t = 0.0; // hours into the trajectory
    std::vector<double> p, q;   // per-bus net injections, p.u.
    std::vector<double> vm, va; // true state, p.u. / rad

    bool operator==(const Sample&) const = default;
};

struct Dataset {
    std::string case_name;
    int n_bus = 0;
    std::vector<Sample> samples;

    bool operator==(const Dataset&) const = default;
    int size() const { return static_cast<int>(samples.size()); }

    Dataset slice(int begin, int count) const {
        if (begin < 0 || count < 0 || begin + count > size())
            throw contract_error("dataset slice out of range");
        Dataset out;
        out.case_name = case_name;
        out.n_bus = n_bus;
        out.samples.assign(samples.begin() + begin, samples.begin() + begin + count);
        return out;
    }
};

inline std::string dataset_to_csv(const Dataset& ds) {
    std::vector<std::string> header{"t"};
    for (int i = 1; i <= ds.n_bus; ++i) header.push_back("P_" + std::to_string(i));
    for (int i = 1; i <= ds.n_bus; ++i) header.push_back("Q_" + std::to_string(i));
    for (int i = 1; i <= ds.n_bus; ++i) header.push_back("vm_" + std::to_string(i));
    for (int i = 1; i <= ds.n_bus; ++i) header.push_back("va_" + std::to_string(i));
    CsvWriter w(header);
    for (const auto& s : ds.samples) {
        w.cell(s.t);
        for (double v : s.p) w.cell(v);
        for (double v : s.q) w.cell(v);
        for (double v : s.vm) w.cell(v);
        for (double v : s.va) w.cell(v);
        w.endrow();
    }
    return w.str();
}

inline void write_dataset(const Dataset& ds, const std::string& path) {
    write_file_atomic(path, dataset_to_csv(ds));
}

inline Dataset dataset_from_csv(const CsvTable& t, const std::string& case_name = "") {
    Dataset ds;
    ds.case_name = case_name;
    const int w = static_cast<int>(t.header.size());
    if (w < 5 || (w - 1) % 4 != 0) throw parse_error("dataset csv needs 1 + 4N columns");
    ds.n_bus = (w - 1) / 4;
    for (const auto& row : t.rows) {
        Sample s;
        s.t = std::strtod(row[0].c_str(), nullptr);
        auto grab = [&](int off) {
            std::vector<double> v(static_cast<size_t>(ds.n_bus));
            for (int i = 0; i < ds.n_bus; ++i)
                v[static_cast<size_t>(i)] =
                    std::strtod(row[static_cast<size_t>(off + i)].c_str(), nullptr);
            return v;
        };
        s.p = grab(1);
        s.q = grab(1 + ds.n_bus);
        s.vm = grab(1 + 2 * ds.n_bus);
        s.va = grab(1 + 3 * ds.n_bus);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

inline Dataset read_dataset(const std::string& path, const std::string& case_name = "") {
    return dataset_from_csv(read_csv(path), case_name);
}

} // namespace pinnse::forge
