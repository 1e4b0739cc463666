#include "sinedet/run_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace sinedet {

std::string format_full(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["version"] = version;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& kv : parameters) params[kv.first] = kv.second;
    j["parameters"] = params;
    j["outputs"] = outputs;
    nlohmann::ordered_json res = nlohmann::ordered_json::object();
    for (const auto& kv : residual_summary) res[kv.first] = kv.second;
    j["residual_summary"] = res;
    j["wall_time_seconds"] = wall_time_seconds;
    return j.dump(2) + "\n";
}

void RunManifest::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("RunManifest::write: cannot open " + path);
    out << to_json();
}

void CsvTable::add_row(const std::vector<double>& row) {
    if (row.size() != columns.size()) throw std::invalid_argument("CsvTable::add_row: width mismatch");
    rows.push_back(row);
}

void CsvTable::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("CsvTable::write: cannot open " + path);
    for (size_t c = 0; c < columns.size(); ++c) {
        out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    }
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            out << format_full(row[c]) << (c + 1 < row.size() ? "," : "\n");
        }
    }
}

void write_plot_script(const std::string& script_path, const std::string& csv_path,
                       const std::vector<std::string>& columns, const std::string& title,
                       const std::string& ylabel) {
    std::ofstream out(script_path);
    if (!out) throw std::runtime_error("write_plot_script: cannot open " + script_path);
    out << "set datafile separator ','\n";
    out << "set key autotitle columnhead\n";
    out << "set title '" << title << "'\n";
    out << "set ylabel '" << ylabel << "'\n";
    out << "plot";
    for (size_t c = 1; c < columns.size(); ++c) {
        out << (c == 1 ? " " : ", ") << "'" << csv_path << "' using 1:" << (c + 1)
            << " with lines";
    }
    out << "\n";
}

}  // namespace sinedet
