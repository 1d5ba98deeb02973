// Experiment reports: named scalars, named pass/fail checks, and CSV
// tables, serialized as report.json plus tables/*.csv in an output
// directory.  Serialization is bit-reproducible for a fixed config and
// seed: keys keep insertion order, floats are written by to_chars, and
// the wall-clock runtime is deliberately left out of the files (it is
// surfaced on stdout instead).

#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "alphamod/config.hpp"

namespace alphamod {

/// Locale-independent decimal formatting at 17 significant digits; the
/// shortest string that round-trips every double.
inline std::string format_sig17(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v,
                             std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct Report {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> inputs;
    std::vector<std::pair<std::string, double>> scalars;
    std::vector<std::pair<std::string, bool>> checks;
    std::vector<std::pair<std::string, Table>> tables;
    bool pass = true;
    double runtime_seconds = 0.0;  ///< stdout only, never serialized

    void add_scalar(const std::string& name, double v) {
        scalars.emplace_back(name, v);
    }

    void add_check(const std::string& name, bool ok) {
        checks.emplace_back(name, ok);
        pass = pass && ok;
    }

    Table& add_table(const std::string& name,
                     std::vector<std::string> header) {
        tables.emplace_back(name, Table{std::move(header), {}});
        return tables.back().second;
    }

    std::string to_json() const {
        nlohmann::ordered_json j;
        j["experiment"] = experiment;
        nlohmann::ordered_json ins = nlohmann::ordered_json::object();
        for (const auto& [k, v] : inputs) ins[k] = v;
        j["inputs"] = std::move(ins);
        nlohmann::ordered_json sc = nlohmann::ordered_json::object();
        for (const auto& [k, v] : scalars) sc[k] = format_sig17(v);
        j["scalars"] = std::move(sc);
        nlohmann::ordered_json ck = nlohmann::ordered_json::object();
        for (const auto& [k, v] : checks) ck[k] = v;
        j["checks"] = std::move(ck);
        nlohmann::ordered_json tb = nlohmann::ordered_json::object();
        for (const auto& [name, t] : tables) {
            nlohmann::ordered_json meta;
            meta["csv"] = "tables/" + name + ".csv";
            meta["rows"] = t.rows.size();
            tb[name] = std::move(meta);
        }
        j["tables"] = std::move(tb);
        j["pass"] = pass;
        return j.dump(2) + "\n";
    }

    static std::string csv_line(const std::vector<std::string>& cells) {
        std::string out;
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ",";
            out += cells[i];
        }
        out += "\n";
        return out;
    }

    void write(const std::string& out_dir) const {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec)
            throw config_error("cannot create output directory: " + out_dir);
        {
            std::ofstream js(out_dir + "/report.json", std::ios::binary);
            if (!js)
                throw config_error("cannot write " + out_dir + "/report.json");
            js << to_json();
        }
        if (tables.empty()) return;
        fs::create_directories(out_dir + "/tables", ec);
        if (ec)
            throw config_error("cannot create " + out_dir + "/tables");
        for (const auto& [name, t] : tables) {
            std::ofstream cs(out_dir + "/tables/" + name + ".csv",
                             std::ios::binary);
            if (!cs)
                throw config_error("cannot write table " + name);
            cs << csv_line(t.header);
            for (const auto& row : t.rows) cs << csv_line(row);
        }
    }
};

}  // namespace alphamod
