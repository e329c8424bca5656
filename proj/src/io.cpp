#include "paramest/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace paramest::io {
namespace {

using nlohmann::json;

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    return s;
}

double parse_number(const std::string &text, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception &) {
        throw std::invalid_argument("line " + std::to_string(line) + ": bad number '" + text + "'");
    }
}

struct Table {
    Eigen::VectorXd times;
    RowMatrix values;
};

// Parses `t,<prefix>1,...,<prefix>n`.
Table parse_table(std::string_view text, char prefix) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = trim(text.substr(start, end - start));
        if (!line.empty()) lines.push_back(line);
        start = end + 1;
    }
    if (lines.empty()) throw std::invalid_argument("empty CSV");

    const auto header = split(lines[0], ',');
    if (header.size() < 2 || trim(header[0]) != "t") {
        throw std::invalid_argument("CSV header must start with 't'");
    }
    for (std::size_t i = 1; i < header.size(); ++i) {
        if (trim(header[i]) != std::string(1, prefix) + std::to_string(i)) {
            throw std::invalid_argument("unexpected CSV column '" + header[i] + "'");
        }
    }
    const auto n = static_cast<Eigen::Index>(header.size() - 1);
    const auto k = static_cast<Eigen::Index>(lines.size() - 1);
    Table table{Eigen::VectorXd(k), RowMatrix(k, n)};
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto fields = split(lines[static_cast<std::size_t>(j) + 1], ',');
        if (static_cast<Eigen::Index>(fields.size()) != n + 1) {
            throw std::invalid_argument("line " + std::to_string(j + 2) + ": expected " +
                                        std::to_string(n + 1) + " fields");
        }
        const auto line_no = static_cast<std::size_t>(j) + 2;
        table.times[j] = parse_number(std::string(trim(fields[0])), line_no);
        for (Eigen::Index i = 0; i < n; ++i) {
            table.values(j, i) =
                parse_number(std::string(trim(fields[static_cast<std::size_t>(i) + 1])), line_no);
        }
    }
    return table;
}

std::string write_table(const Eigen::VectorXd &times, const RowMatrix &values, char prefix) {
    std::string out = "t";
    for (Eigen::Index i = 0; i < values.cols(); ++i) {
        out += ',';
        out += prefix;
        out += std::to_string(i + 1);
    }
    out += '\n';
    for (Eigen::Index j = 0; j < times.size(); ++j) {
        out += format_double(times[j]);
        for (Eigen::Index i = 0; i < values.cols(); ++i) {
            out += ',';
            out += format_double(values(j, i));
        }
        out += '\n';
    }
    return out;
}

json vector_json(const Eigen::VectorXd &v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

} // namespace

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string trajectory_csv(const Trajectory &trajectory) {
    return write_table(trajectory.times, trajectory.states, 'x');
}

Trajectory parse_trajectory_csv(std::string_view text, std::string model_name) {
    auto table = parse_table(text, 'x');
    return Trajectory{std::move(model_name), std::move(table.times), std::move(table.values)};
}

std::string measurement_csv(const MeasurementSet &measurements) {
    return write_table(measurements.times, measurements.observations, 'y');
}

std::string measurement_metadata_json(const MeasurementSet &m) {
    json j = {{"model", m.model_name},
              {"noise_kind", std::string(to_string(m.noise.kind))},
              {"level", m.noise.level},
              {"seed", m.noise.seed}};
    return j.dump(2) + "\n";
}

MeasurementSet parse_measurement_csv(std::string_view csv, std::string_view metadata_json) {
    auto table = parse_table(csv, 'y');
    MeasurementSet m;
    m.times = std::move(table.times);
    m.observations = std::move(table.values);
    m.weights = RowMatrix::Ones(m.observations.rows(), m.observations.cols());
    if (!metadata_json.empty()) {
        const json j = json::parse(metadata_json);
        m.model_name = j.value("model", std::string{});
        m.noise.kind = parse_noise_kind(j.value("noise_kind", std::string{"white_gaussian"}));
        m.noise.level = j.value("level", 0.0);
        m.noise.seed = j.value("seed", std::uint64_t{0});
    }
    return m;
}

std::filesystem::path metadata_path(const std::filesystem::path &csv_path) {
    auto p = csv_path;
    p += ".meta.json";
    return p;
}

std::string solve_report_json(const SolveReport &report, const std::vector<std::string> &param_names,
                              bool include_trace) {
    json j;
    j["param_names"] = param_names;
    j["final_params"] = vector_json(report.final_params);
    j["final_objective"] = report.final_objective;
    j["iterations"] = report.iterations;
    j["termination"] = std::string(to_string(report.termination));
    if (include_trace) {
        json trace = json::array();
        for (const auto &s : report.trace) {
            trace.push_back({{"iteration", s.iteration},
                             {"iterate", vector_json(s.iterate)},
                             {"radius", s.radius},
                             {"ratio", number_or_null(s.last_ratio)},
                             {"objective", s.objective_value},
                             {"step_norm", s.step_norm},
                             {"predicted_reduction", s.predicted_reduction},
                             {"trial_objective", number_or_null(s.trial_objective)},
                             {"accepted", s.accepted}});
        }
        j["trace"] = std::move(trace);
    }
    return j.dump(2) + "\n";
}

std::string solve_report_text(const SolveReport &report, const std::vector<std::string> &param_names) {
    std::ostringstream out;
    out << "termination: " << to_string(report.termination) << '\n';
    out << "iterations:  " << report.iterations << '\n';
    out << "objective:   " << format_double(report.final_objective) << '\n';
    for (Eigen::Index i = 0; i < report.final_params.size(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const std::string name = idx < param_names.size() ? param_names[idx] : "p" + std::to_string(i + 1);
        out << "  " << name << " = " << format_double(report.final_params[i]) << '\n';
    }
    return out.str();
}

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path &path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

} // namespace paramest::io
