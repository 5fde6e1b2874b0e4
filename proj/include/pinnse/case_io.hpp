#pragma once

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "pinnse/csv.hpp"
#include "pinnse/errors.hpp"
#include "pinnse/grid.hpp"

namespace pinnse::grid {

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

inline double parse_num(const std::string& s, int line_no) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw parse_error("not a number: " + s, line_no);
    return v;
}

inline int parse_id(const std::string& s, int line_no) {
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') throw parse_error("not an integer: " + s, line_no);
    return static_cast<int>(v);
}

} // namespace detail

// Native case format. Whitespace-delimited sections:
//
//   CASE <name> <base_mva>
//   BUS
//   <id> <kind> <load_p> <load_q> <gen_p> <vset> <shunt_g> <shunt_b>
//   END
//   BRANCH
//   <from> <to> <r> <x> <b_charging> [tap]
//   END
//
// Lines starting with # are comments. Kinds: slack, pv, pq.
inline GridCase parse_case(const std::string& text) {
    using detail::parse_id;
    using detail::parse_num;
    GridCase gc;
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    enum class Section { None, Bus, Branch } sec = Section::None;
    bool saw_case = false;
    while (std::getline(in, line)) {
        ++ln;
        auto toks = detail::split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks[0] == "CASE") {
            if (toks.size() != 3) throw parse_error("CASE line needs name and base_mva", ln);
            gc.name = toks[1];
            gc.base_mva = parse_num(toks[2], ln);
            if (gc.base_mva <= 0.0) throw parse_error("base_mva must be positive", ln);
            saw_case = true;
            continue;
        }
        if (toks[0] == "BUS") { sec = Section::Bus; continue; }
        if (toks[0] == "BRANCH") { sec = Section::Branch; continue; }
        if (toks[0] == "END") { sec = Section::None; continue; }
        if (sec == Section::Bus) {
            if (toks.size() != 8) throw parse_error("bus record needs 8 columns", ln);
            Bus b;
            b.id = parse_id(toks[0], ln);
            try {
                b.kind = bus_kind_from(toks[1]);
            } catch (const validation_error& e) {
                throw parse_error(e.what(), ln);
            }
            b.load_p = parse_num(toks[2], ln);
            b.load_q = parse_num(toks[3], ln);
            b.gen_p = parse_num(toks[4], ln);
            b.voltage_setpoint = parse_num(toks[5], ln);
            b.shunt_g = parse_num(toks[6], ln);
            b.shunt_b = parse_num(toks[7], ln);
            gc.buses.push_back(b);
            continue;
        }
        if (sec == Section::Branch) {
            if (toks.size() != 5 && toks.size() != 6)
                throw parse_error("branch record needs 5 or 6 columns", ln);
            Branch br;
            br.from_bus = parse_id(toks[0], ln);
            br.to_bus = parse_id(toks[1], ln);
            br.r = parse_num(toks[2], ln);
            br.x = parse_num(toks[3], ln);
            br.b_charging = parse_num(toks[4], ln);
            br.tap = toks.size() == 6 ? parse_num(toks[5], ln) : 1.0;
            gc.branches.push_back(br);
            continue;
        }
        throw parse_error("unexpected record outside BUS/BRANCH section: " + toks[0], ln);
    }
    if (!saw_case) throw parse_error("missing CASE header line", ln);
    gc.validate();
    return gc;
}

inline std::string serialize_case(const GridCase& gc) {
    std::ostringstream out;
    out << "CASE " << gc.name << " " << fmt_g17(gc.base_mva) << "\n";
    out << "BUS\n";
    out << "# id kind load_p load_q gen_p vset shunt_g shunt_b\n";
    for (const auto& b : gc.buses) {
        out << b.id << " " << to_string(b.kind) << " " << fmt_g17(b.load_p) << " "
            << fmt_g17(b.load_q) << " " << fmt_g17(b.gen_p) << " " << fmt_g17(b.voltage_setpoint)
            << " " << fmt_g17(b.shunt_g) << " " << fmt_g17(b.shunt_b) << "\n";
    }
    out << "END\n";
    out << "BRANCH\n";
    out << "# from to r x b_charging tap\n";
    for (const auto& br : gc.branches) {
        out << br.from_bus << " " << br.to_bus << " " << fmt_g17(br.r) << " " << fmt_g17(br.x)
            << " " << fmt_g17(br.b_charging) << " " << fmt_g17(br.tap) << "\n";
    }
    out << "END\n";
    return out.str();
}

inline GridCase load_case(const std::string& path) {
    try {
        return parse_case(read_file(path));
    } catch (const parse_error& e) {
        throw parse_error(path + ": " + e.what());
    }
}

// IEEE Common Data Format importer. Bus names may contain blanks, so the bus
// number is sliced from fixed columns 1-4 and the remainder of the record is
// tokenized from column 19 onward; branch records carry no text fields.
inline GridCase import_cdf(const std::string& text, const std::string& name) {
    using detail::parse_num;
    GridCase gc;
    gc.name = name;
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    if (!std::getline(in, line)) throw parse_error("empty CDF file", 0);
    ++ln;
    if (line.size() >= 37) {
        std::string mva = line.substr(31, 6);
        char* end = nullptr;
        double v = std::strtod(mva.c_str(), &end);
        if (end != mva.c_str() && v > 0.0) gc.base_mva = v;
    }
    enum class Section { None, Bus, Branch } sec = Section::None;
    while (std::getline(in, line)) {
        ++ln;
        if (line.rfind("BUS DATA", 0) == 0) { sec = Section::Bus; continue; }
        if (line.rfind("BRANCH DATA", 0) == 0) { sec = Section::Branch; continue; }
        if (line.rfind("END OF DATA", 0) == 0) break;
        auto first = detail::split_ws(line);
        if (first.empty()) continue;
        if (first[0] == "-999") { sec = Section::None; continue; }
        if (sec == Section::Bus) {
            if (line.size() < 18) throw parse_error("short bus record", ln);
            Bus b;
            b.id = detail::parse_id(detail::split_ws(line.substr(0, 4)).at(0), ln);
            auto toks = detail::split_ws(line.substr(18));
            // area zone type V angle loadMW loadMVAR genMW genMVAR baseKV
            // desiredV maxMVAR minMVAR shuntG shuntB [remote]
            if (toks.size() < 15) throw parse_error("bus record needs 15+ fields", ln);
            int type = detail::parse_id(toks[2], ln);
            b.kind = type == 3 ? BusKind::Slack : (type == 2 ? BusKind::PV : BusKind::PQ);
            b.load_p = parse_num(toks[5], ln);
            b.load_q = parse_num(toks[6], ln);
            b.gen_p = parse_num(toks[7], ln);
            double desired = parse_num(toks[10], ln);
            double final_v = parse_num(toks[3], ln);
            b.voltage_setpoint = desired > 0.0 ? desired : (final_v > 0.0 ? final_v : 1.0);
            b.shunt_g = parse_num(toks[13], ln);
            b.shunt_b = parse_num(toks[14], ln);
            gc.buses.push_back(b);
            continue;
        }
        if (sec == Section::Branch) {
            auto toks = first;
            // from to area zone circuit type r x b mva1 mva2 mva3 ctrl side [tap ...]
            if (toks.size() < 9) throw parse_error("branch record needs 9+ fields", ln);
            Branch br;
            br.from_bus = detail::parse_id(toks[0], ln);
            br.to_bus = detail::parse_id(toks[1], ln);
            br.r = parse_num(toks[6], ln);
            br.x = parse_num(toks[7], ln);
            br.b_charging = parse_num(toks[8], ln);
            if (toks.size() >= 15) {
                double tap = parse_num(toks[14], ln);
                br.tap = tap > 0.0 ? tap : 1.0;
            }
            gc.branches.push_back(br);
            continue;
        }
    }
    gc.validate();
    return gc;
}

} // namespace pinnse::grid
