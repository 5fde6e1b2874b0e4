#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pinnse/errors.hpp"

namespace pinnse::grid {

enum class BusKind { Slack, PV, PQ };

inline const char* to_string(BusKind k) {
    switch (k) {
        case BusKind::Slack: return "slack";
        case BusKind::PV: return "pv";
        case BusKind::PQ: return "pq";
    }
    return "?";
}

inline BusKind bus_kind_from(const std::string& s) {
    if (s == "slack" || s == "SLACK" || s == "3") return BusKind::Slack;
    if (s == "pv" || s == "PV" || s == "2") return BusKind::PV;
    if (s == "pq" || s == "PQ" || s == "0" || s == "1") return BusKind::PQ;
    throw validation_error("unknown bus kind: " + s);
}

struct Bus {
    int id = 0;                    // 1-based
    BusKind kind = BusKind::PQ;
    double load_p = 0.0;           // MW
    double load_q = 0.0;           // MVAr
    double gen_p = 0.0;            // MW
    double voltage_setpoint = 1.0; // p.u., meaningful for PV/Slack
    double shunt_g = 0.0;          // p.u.
    double shunt_b = 0.0;          // p.u.

    bool operator==(const Bus&) const = default;
};

struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;          // p.u.
    double x = 0.0;          // p.u.
    double b_charging = 0.0; // p.u., total
    double tap = 1.0;        // off-nominal ratio, 1 if none

    bool operator==(const Branch&) const = default;
};

struct GridCase {
    std::string name;
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;

    bool operator==(const GridCase&) const = default;

    int n() const { return static_cast<int>(buses.size()); }

    // ids are validated contiguous, so index is id-1
    int bus_index(int id) const {
        if (id < 1 || id > n()) throw contract_error("bus id out of range: " + std::to_string(id));
        return id - 1;
    }

    const Bus& bus(int id) const { return buses[static_cast<size_t>(bus_index(id))]; }
    Bus& bus(int id) { return buses[static_cast<size_t>(bus_index(id))]; }

    int slack_index() const {
        for (int i = 0; i < n(); ++i)
            if (buses[static_cast<size_t>(i)].kind == BusKind::Slack) return i;
        throw validation_error("case has no slack bus");
    }

    double total_load_p() const {
        double s = 0.0;
        for (const auto& b : buses) s += b.load_p;
        return s;
    }

    double total_gen_p() const {
        double s = 0.0;
        for (const auto& b : buses) s += b.gen_p;
        return s;
    }

    void validate() const {
        if (buses.empty()) throw validation_error("case has no buses");
        int slack_count = 0;
        for (int i = 0; i < n(); ++i) {
            const Bus& b = buses[static_cast<size_t>(i)];
            if (b.id != i + 1)
                throw validation_error("bus ids must be contiguous starting at 1; got id " +
                                       std::to_string(b.id) + " at position " + std::to_string(i));
            if (b.kind == BusKind::Slack) ++slack_count;
            if (b.kind != BusKind::PQ && b.voltage_setpoint <= 0.0)
                throw validation_error("bus " + std::to_string(b.id) +
                                       ": voltage setpoint must be positive");
            if (!std::isfinite(b.load_p) || !std::isfinite(b.load_q) || !std::isfinite(b.gen_p))
                throw validation_error("bus " + std::to_string(b.id) + ": non-finite power value");
        }
        if (slack_count != 1)
            throw validation_error("case must have exactly one slack bus, found " +
                                   std::to_string(slack_count));
        for (const auto& br : branches) {
            if (br.from_bus < 1 || br.from_bus > n() || br.to_bus < 1 || br.to_bus > n())
                throw validation_error("branch " + std::to_string(br.from_bus) + "-" +
                                       std::to_string(br.to_bus) + " references unknown bus");
            if (br.from_bus == br.to_bus)
                throw validation_error("branch endpoints must differ (bus " +
                                       std::to_string(br.from_bus) + ")");
            if (br.r < 0.0)
                throw validation_error("branch " + std::to_string(br.from_bus) + "-" +
                                       std::to_string(br.to_bus) + ": negative resistance");
            if (br.r == 0.0 && br.x == 0.0)
                throw validation_error("branch " + std::to_string(br.from_bus) + "-" +
                                       std::to_string(br.to_bus) + ": zero impedance");
            if (br.tap <= 0.0)
                throw validation_error("branch " + std::to_string(br.from_bus) + "-" +
                                       std::to_string(br.to_bus) + ": tap must be positive");
        }
        if (!connected())
            throw validation_error("network is not a single connected island");
    }

  private:
    bool connected() const {
        if (buses.size() <= 1) return true;
        std::vector<std::vector<int>> adj(buses.size());
        for (const auto& br : branches) {
            adj[static_cast<size_t>(br.from_bus - 1)].push_back(br.to_bus - 1);
            adj[static_cast<size_t>(br.to_bus - 1)].push_back(br.from_bus - 1);
        }
        std::vector<char> seen(buses.size(), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        size_t count = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : adj[static_cast<size_t>(u)]) {
                if (!seen[static_cast<size_t>(v)]) {
                    seen[static_cast<size_t>(v)] = 1;
                    ++count;
                    stack.push_back(v);
                }
            }
        }
        return count == buses.size();
    }
};

} // namespace pinnse::grid
