#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pinnse/errors.hpp"

namespace pinnse {

// Shortest exact decimal form of a double: %.17g round-trips IEEE 754
// binary64, which is what the reproducibility checks rely on.
inline std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvWriter {
    std::ostringstream out;
    int ncols = 0;
    int col = 0;

    explicit CsvWriter(const std::vector<std::string>& header) {
        ncols = static_cast<int>(header.size());
        for (int i = 0; i < ncols; ++i) {
            if (i) out << ',';
            out << header[i];
        }
        out << '\n';
    }

    CsvWriter& cell(const std::string& s) {
        out << (col ? "," : "") << s;
        ++col;
        return *this;
    }
    CsvWriter& cell(double v) { return cell(fmt_g17(v)); }
    CsvWriter& cell(int v) { return cell(std::to_string(v)); }
    CsvWriter& cell(long v) { return cell(std::to_string(v)); }

    void endrow() {
        if (col != ncols) throw contract_error("CsvWriter: row width mismatch");
        out << '\n';
        col = 0;
    }

    std::string str() const { return out.str(); }
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col_index(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline CsvTable read_csv_text(const std::string& text, const std::string& origin = "<string>") {
    std::istringstream in(text);
    CsvTable t;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (t.header.empty() && t.rows.empty() && ln == 1) {
            t.header = std::move(cells);
        } else {
            if (cells.size() != t.header.size())
                throw parse_error("csv row width mismatch in " + origin, ln);
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open csv: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_csv_text(buf.str(), path);
}

// All artifact files are written to a temp name then renamed, so a crashed
// run never leaves a truncated csv behind.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, p);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace pinnse
