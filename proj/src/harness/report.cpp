#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bifbm/errors.hpp"
#include "bifbm/harness.hpp"

namespace bifbm::harness {

namespace {

using Json = nlohmann::ordered_json;

// The JSON mirror carries the same rounded value the CSV prints.
Json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return std::strtod(format_number(v).c_str(), nullptr);
}

template <class T>
Json optional_number(const std::optional<T>& v) {
    return v ? number(static_cast<double>(*v)) : Json(nullptr);
}

}  // namespace

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string emit_csv(const RunReport& report) {
    const auto& cfg = report.config;
    std::string out(kCsvHeader);
    out += '\n';
    const std::string tail = "," + format_number(cfg.H) + "," + format_number(cfg.K) + "," + std::to_string(cfg.seed);
    for (const auto& r : report.rows) {
        out += r.label;
        out += ',' + format_number(r.t);
        out += ',' + format_number(r.mean);
        out += ',' + (r.std_error ? format_number(*r.std_error) : std::string());
        out += ',' + std::to_string(r.n_paths);
        out += ',' + format_number(r.epsilon);
        out += tail;
        out += ',' + (r.target ? format_number(*r.target) : std::string());
        const auto pass = r.pass();
        out += ',' + (pass ? std::string(*pass ? "true" : "false") : std::string());
        out += '\n';
    }
    return out;
}

std::string emit_json(const RunReport& report, bool with_timestamp) {
    const auto& cfg = report.config;
    Json doc;
    doc["experiment"] = std::string(to_string(cfg.experiment));
    Json config = Json::object();
    std::istringstream lines(cfg.to_text());
    for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) config[line.substr(0, eq)] = line.substr(eq + 3);
    }
    doc["config"] = config;
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        Json row;
        row["label"] = r.label;
        row["t"] = number(r.t);
        row["mean"] = number(r.mean);
        row["stderr"] = optional_number(r.std_error);
        row["n_paths"] = r.n_paths;
        row["epsilon"] = number(r.epsilon);
        row["H"] = number(cfg.H);
        row["K"] = number(cfg.K);
        row["seed"] = cfg.seed;
        row["target"] = optional_number(r.target);
        const auto pass = r.pass();
        row["pass"] = pass ? Json(*pass) : Json(nullptr);
        rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(rows);
    doc["all_pass"] = report.all_pass();
    if (with_timestamp) {
        doc["timestamp"] = report.timestamp;
        doc["wall_clock_seconds"] = number(report.wall_clock_seconds);
    }
    return doc.dump(2) + "\n";
}

std::string emit_report(const RunReport& report, OutputFormat format, bool with_timestamp) {
    return format == OutputFormat::csv ? emit_csv(report) : emit_json(report, with_timestamp);
}

void write_report(const std::string& bytes, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace bifbm::harness
