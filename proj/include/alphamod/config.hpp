// Experiment configuration: a flat INI-style text format (sections one
// level deep, key = value lines, full-line # or ; comments) parsed into
// string maps with per-key line numbers, plus typed accessors that turn
// malformed values into diagnostics naming file, line, section and key.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace alphamod {

/// Parse or lookup failure in an experiment configuration.  Messages carry
/// origin:line and the offending section/key where available.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

struct ExperimentConfig {
    std::string origin = "<memory>";
    std::string id;
    uint64_t seed = 1;

    std::map<std::string, std::map<std::string, std::string>> sections;
    std::map<std::pair<std::string, std::string>, int> key_lines;

    bool has(const std::string& sec, const std::string& key) const {
        auto it = sections.find(sec);
        return it != sections.end() && it->second.count(key) > 0;
    }

    std::string where(const std::string& sec, const std::string& key) const {
        auto it = key_lines.find({sec, key});
        std::ostringstream os;
        os << origin;
        if (it != key_lines.end()) os << ":" << it->second;
        os << ": [" << sec << "] " << key;
        return os.str();
    }

    std::string str(const std::string& sec, const std::string& key,
                    const std::string& dflt) const {
        auto it = sections.find(sec);
        if (it == sections.end()) return dflt;
        auto jt = it->second.find(key);
        return jt == it->second.end() ? dflt : jt->second;
    }

    std::string require_str(const std::string& sec,
                            const std::string& key) const {
        if (!has(sec, key))
            throw config_error(origin + ": missing required key [" + sec +
                               "] " + key);
        return sections.at(sec).at(key);
    }

    double num(const std::string& sec, const std::string& key,
               double dflt) const {
        if (!has(sec, key)) return dflt;
        const std::string& v = sections.at(sec).at(key);
        char* end = nullptr;
        double x = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0')
            throw config_error(where(sec, key) + ": not a number: '" + v + "'");
        return x;
    }

    long long integer(const std::string& sec, const std::string& key,
                      long long dflt) const {
        if (!has(sec, key)) return dflt;
        const std::string& v = sections.at(sec).at(key);
        char* end = nullptr;
        long long x = std::strtoll(v.c_str(), &end, 10);
        if (end == v.c_str() || *end != '\0')
            throw config_error(where(sec, key) + ": not an integer: '" + v +
                               "'");
        return x;
    }

    uint64_t u64(const std::string& sec, const std::string& key,
                 uint64_t dflt) const {
        if (!has(sec, key)) return dflt;
        const std::string& v = sections.at(sec).at(key);
        char* end = nullptr;
        unsigned long long x = std::strtoull(v.c_str(), &end, 10);
        if (end == v.c_str() || *end != '\0' || v.find('-') != std::string::npos)
            throw config_error(where(sec, key) + ": not an unsigned integer: '" +
                               v + "'");
        return static_cast<uint64_t>(x);
    }

    bool flag(const std::string& sec, const std::string& key,
              bool dflt) const {
        if (!has(sec, key)) return dflt;
        const std::string& v = sections.at(sec).at(key);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        throw config_error(where(sec, key) + ": not a boolean: '" + v + "'");
    }

    std::vector<double> num_list(const std::string& sec, const std::string& key,
                                 const std::vector<double>& dflt) const {
        if (!has(sec, key)) return dflt;
        const std::string& v = sections.at(sec).at(key);
        std::vector<double> out;
        std::string item;
        std::istringstream is(v);
        while (std::getline(is, item, ',')) {
            item = detail::trim(item);
            char* end = nullptr;
            double x = std::strtod(item.c_str(), &end);
            if (item.empty() || end == item.c_str() || *end != '\0')
                throw config_error(where(sec, key) +
                                   ": not a comma-separated number list: '" + v +
                                   "'");
            out.push_back(x);
        }
        if (out.empty())
            throw config_error(where(sec, key) + ": empty list");
        return out;
    }

    static ExperimentConfig parse_string(const std::string& text,
                                         const std::string& origin) {
        ExperimentConfig cfg;
        cfg.origin = origin;
        std::istringstream is(text);
        std::string line, section;
        int ln = 0;
        while (std::getline(is, line)) {
            ++ln;
            std::string t = detail::trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                if (t.back() != ']' || t.size() < 3)
                    throw config_error(origin + ":" + std::to_string(ln) +
                                       ": malformed section header: '" + t +
                                       "'");
                section = detail::trim(t.substr(1, t.size() - 2));
                if (section.empty())
                    throw config_error(origin + ":" + std::to_string(ln) +
                                       ": empty section name");
                cfg.sections[section];
                continue;
            }
            size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw config_error(origin + ":" + std::to_string(ln) +
                                   ": expected 'key = value' or '[section]': '" +
                                   t + "'");
            if (section.empty())
                throw config_error(origin + ":" + std::to_string(ln) +
                                   ": key before any [section]");
            std::string key = detail::trim(t.substr(0, eq));
            std::string val = detail::trim(t.substr(eq + 1));
            if (key.empty())
                throw config_error(origin + ":" + std::to_string(ln) +
                                   ": empty key");
            if (val.empty())
                throw config_error(origin + ":" + std::to_string(ln) +
                                   ": empty value for key '" + key + "'");
            if (cfg.sections[section].count(key))
                throw config_error(origin + ":" + std::to_string(ln) +
                                   ": duplicate key [" + section + "] " + key);
            cfg.sections[section][key] = val;
            cfg.key_lines[{section, key}] = ln;
        }
        cfg.id = cfg.str("experiment", "id", "");
        cfg.seed = cfg.u64("experiment", "seed", 1);
        return cfg;
    }

    static ExperimentConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw config_error("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str(), path);
    }
};

}  // namespace alphamod
