#pragma once

#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pinnse/csv.hpp"
#include "pinnse/errors.hpp"

namespace pinnse {

// Minimal sectioned key=value format used for scenario specs, experiment
// configs and metadata sidecars:
//
//   # comment
//   key = value
//   [section]
//   other = 1,2,3
//
// Keys are unique per section; values are raw strings until queried.
class KvConfig {
  public:
    KvConfig() = default;

    static KvConfig parse(const std::string& text, const std::string& origin = "<string>") {
        KvConfig cfg;
        std::istringstream in(text);
        std::string line;
        std::string section;
        int ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            std::string s = trim(line);
            if (s.empty() || s[0] == '#') continue;
            if (s.front() == '[') {
                if (s.back() != ']') throw parse_error(origin + ": unterminated section header", ln);
                section = trim(s.substr(1, s.size() - 2));
                cfg.sections_[section]; // ensure it exists even if empty
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos) throw parse_error(origin + ": expected key = value", ln);
            std::string key = trim(s.substr(0, eq));
            std::string val = trim(s.substr(eq + 1));
            if (key.empty()) throw parse_error(origin + ": empty key", ln);
            cfg.sections_[section][key] = val;
        }
        return cfg;
    }

    static KvConfig load(const std::string& path) { return parse(read_file(path), path); }

    bool has(const std::string& section, const std::string& key) const {
        auto it = sections_.find(section);
        return it != sections_.end() && it->second.count(key) > 0;
    }

    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

    std::string get_str(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
        auto it = sections_.find(section);
        if (it == sections_.end()) return fallback;
        auto jt = it->second.find(key);
        return jt == it->second.end() ? fallback : jt->second;
    }

    std::string require_str(const std::string& section, const std::string& key) const {
        if (!has(section, key))
            throw config_error("missing config key '" + key + "'" +
                               (section.empty() ? "" : " in section [" + section + "]"));
        return sections_.at(section).at(key);
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        if (!has(section, key)) return fallback;
        return to_double(sections_.at(section).at(key), key);
    }

    double require_double(const std::string& section, const std::string& key) const {
        return to_double(require_str(section, key), key);
    }

    int get_int(const std::string& section, const std::string& key, int fallback) const {
        if (!has(section, key)) return fallback;
        return static_cast<int>(to_long(sections_.at(section).at(key), key));
    }

    long get_long(const std::string& section, const std::string& key, long fallback) const {
        if (!has(section, key)) return fallback;
        return to_long(sections_.at(section).at(key), key);
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        std::string v = sections_.at(section).at(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw config_error("key '" + key + "' is not a boolean: " + v);
    }

    std::vector<std::string> get_list(const std::string& section, const std::string& key) const {
        std::vector<std::string> out;
        if (!has(section, key)) return out;
        std::istringstream ss(sections_.at(section).at(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            std::string t = trim(item);
            if (!t.empty()) out.push_back(t);
        }
        return out;
    }

    std::vector<double> get_doubles(const std::string& section, const std::string& key) const {
        std::vector<double> out;
        for (const auto& s : get_list(section, key)) out.push_back(to_double(s, key));
        return out;
    }

    std::vector<int> get_ints(const std::string& section, const std::string& key) const {
        std::vector<int> out;
        for (const auto& s : get_list(section, key)) out.push_back(static_cast<int>(to_long(s, key)));
        return out;
    }

    void set(const std::string& section, const std::string& key, const std::string& val) {
        sections_[section][key] = val;
    }

    // Deterministic serialization (sections and keys sorted).
    std::string dump() const {
        std::ostringstream out;
        for (const auto& [sec, kv] : sections_) {
            if (!sec.empty()) out << "[" << sec << "]\n";
            for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
        }
        return out.str();
    }

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

  private:
    static std::string trim(const std::string& s) {
        size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static double to_double(const std::string& s, const std::string& key) {
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            throw config_error("key '" + key + "' is not a number: " + s);
        return v;
    }

    static long to_long(const std::string& s, const std::string& key) {
        char* end = nullptr;
        long v = std::strtol(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0')
            throw config_error("key '" + key + "' is not an integer: " + s);
        return v;
    }

    std::map<std::string, std::map<std::string, std::string>> sections_;
};

} // namespace pinnse
