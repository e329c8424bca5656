#include "paramest/harness.hpp"

#include "paramest/dynamics.hpp"
#include "paramest/errors.hpp"
#include "paramest/integrator.hpp"
#include "paramest/io.hpp"
#include "paramest/objective.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace paramest {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json vector_json(const Eigen::VectorXd &v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(std::isfinite(v[i]) ? json(v[i]) : json(nullptr));
    }
    return out;
}

Eigen::VectorXd json_vector(const json &j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = j[i].is_null() ? kNaN : j[i].get<double>();
    }
    return v;
}

json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double json_number(const json &j) { return j.is_null() ? kNaN : j.get<double>(); }

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (!same(a[i], b[i])) return false;
    }
    return true;
}

std::string fixed(double v, int decimals) {
    if (!std::isfinite(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string short_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string pad_left(const std::string &s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string &s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

struct Job {
    std::size_t kind_index;
    std::size_t level_index;
    std::size_t repetition;
};

RunRecord run_single(const ModelSpec &model, const Trajectory &truth, const ExperimentConfig &config,
                     const Eigen::VectorXd &initial_state, const Eigen::VectorXd &start,
                     double step, const Job &job) {
    RunRecord record;
    record.seed = repetition_seed(config.base_seed, job.kind_index, job.level_index, job.repetition);
    const NoiseSpec noise{config.noise_kinds[job.kind_index], config.noise_levels[job.level_index],
                          record.seed};
    try {
        ObjectiveContext ctx{model, corrupt(truth, noise), initial_state, step};
        ctx.validate();
        const SolveReport solve =
            estimate_with_warmup(ctx, start, config.solver, config.warmup_horizons);
        record.params = solve.final_params;
        record.iterations = solve.iterations;
        record.termination = solve.termination;
        record.rmse = rmse(fitted_trajectory(ctx, solve.final_params), ctx.measurements);
    } catch (const std::exception &e) {
        record.failed = true;
        record.error = e.what();
        record.params = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(model.param_dim), kNaN);
        record.rmse = kNaN;
    }
    return record;
}

ReportRow aggregate(NoiseKind kind, double level, std::vector<RunRecord> runs, std::size_t p) {
    ReportRow row;
    row.noise_kind = kind;
    row.noise_level = level;
    const auto dim = static_cast<Eigen::Index>(p);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
    double rmse_sum = 0.0;
    std::size_t ok = 0;
    for (const auto &r : runs) {
        if (r.failed) {
            ++row.excluded;
            continue;
        }
        sum += r.params;
        rmse_sum += r.rmse;
        ++ok;
    }
    if (ok == 0) {
        row.mean_params = Eigen::VectorXd::Constant(dim, kNaN);
        row.std_params = Eigen::VectorXd::Constant(dim, kNaN);
        row.mean_rmse = kNaN;
    } else {
        row.mean_params = sum / static_cast<double>(ok);
        row.mean_rmse = rmse_sum / static_cast<double>(ok);
        Eigen::VectorXd ss = Eigen::VectorXd::Zero(dim);
        for (const auto &r : runs) {
            if (!r.failed) ss += (r.params - row.mean_params).cwiseAbs2();
        }
        row.std_params = ok > 1 ? (ss / static_cast<double>(ok - 1)).cwiseSqrt().eval()
                                : Eigen::VectorXd::Zero(dim);
    }
    row.per_run = std::move(runs);
    return row;
}

} // namespace

void ExperimentConfig::validate() const {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    for (double level : noise_levels) {
        if (!(level >= 0.0) || !std::isfinite(level)) {
            throw std::invalid_argument("noise levels must be finite and >= 0");
        }
    }
    solver.validate();
    for (double h : warmup_horizons) {
        if (!(h > 0.0)) throw std::invalid_argument("warm-up horizons must be positive");
    }
    const auto &model = find_model(model_name);
    if (start_params.size() != 0 &&
        static_cast<std::size_t>(start_params.size()) != model.param_dim) {
        throw DimensionError("start_params must have " + std::to_string(model.param_dim) +
                             " entries");
    }
    if (initial_state.size() != 0 &&
        static_cast<std::size_t>(initial_state.size()) != model.state_dim) {
        throw DimensionError("initial_state must have " + std::to_string(model.state_dim) +
                             " entries");
    }
}

Eigen::VectorXd default_start_params(const std::string &model_name) {
    const auto &model = find_model(model_name);
    if (model.name == "van_der_pol") {
        return Eigen::VectorXd::Constant(1, 1.35);
    }
    return 0.9 * model.true_params;
}

ExperimentConfig default_config(const std::string &model_name) {
    ExperimentConfig config;
    config.model_name = find_model(model_name).name;
    config.start_params = default_start_params(model_name);
    config.solver.initial_radius = 0.1;
    config.solver.max_radius = 100.0 * config.solver.initial_radius;
    config.solver.tolerance = 1e-6;
    if (config.model_name == "lorenz") {
        // Chaos makes the full-span objective useless far from the truth; grow the fit
        // window instead.
        config.warmup_horizons = {1.0, 3.0};
    }
    return config;
}

ExperimentConfig noise_comparison_config(const std::string &model_name, double level) {
    ExperimentConfig config = default_config(model_name);
    config.noise_levels = {level};
    config.noise_kinds = {NoiseKind::white_gaussian, NoiseKind::pink};
    return config;
}

MeasurementSet head(const MeasurementSet &m, std::size_t count) {
    if (count > m.size()) throw std::invalid_argument("head: count exceeds measurement size");
    const auto k = static_cast<Eigen::Index>(count);
    MeasurementSet out;
    out.model_name = m.model_name;
    out.times = m.times.head(k);
    out.observations = m.observations.topRows(k);
    out.weights = m.weights.topRows(k);
    out.noise = m.noise;
    return out;
}

SolveReport estimate_with_warmup(const ObjectiveContext &ctx, const Eigen::VectorXd &start,
                                 const TrustRegionConfig &solver,
                                 const std::vector<double> &warmup_horizons) {
    const double t0 = ctx.measurements.times[0];
    const double span = ctx.measurements.times[ctx.measurements.times.size() - 1] - t0;
    Eigen::VectorXd theta = start;
    int iterations = 0;
    for (double h : warmup_horizons) {
        if (h >= span) continue;
        const std::size_t count = grid_size(t0, t0 + h, ctx.integration_step);
        if (count < 2) continue;
        ObjectiveContext prefix{ctx.model, head(ctx.measurements, count), ctx.initial_state,
                                ctx.integration_step};
        const SolveReport stage = minimize(
            [&prefix](const Eigen::VectorXd &p) { return evaluate(prefix, p); }, theta, solver);
        theta = stage.final_params;
        iterations += stage.iterations;
    }
    SolveReport report = minimize(
        [&ctx](const Eigen::VectorXd &p) { return evaluate(ctx, p); }, theta, solver);
    report.iterations += iterations;
    return report;
}

std::uint64_t repetition_seed(std::uint64_t base_seed, std::size_t kind_index,
                              std::size_t level_index, std::size_t repetition) {
    std::uint64_t h = mix64(static_cast<std::uint64_t>(kind_index));
    h = mix64(h ^ static_cast<std::uint64_t>(level_index));
    h = mix64(h ^ static_cast<std::uint64_t>(repetition));
    return base_seed ^ h;
}

ExperimentReport run_experiment(const ExperimentConfig &config) {
    config.validate();
    const ModelSpec &model = find_model(config.model_name);

    ExperimentReport report;
    report.model_name = model.name;
    report.param_names = model.param_names;
    report.true_params = model.true_params;
    report.start_params = config.start_params.size() ? config.start_params
                                                     : default_start_params(model.name);
    report.t0 = config.t0.value_or(model.default_time_span.t0);
    report.t1 = config.t1.value_or(model.default_time_span.t1);
    report.step = config.step.value_or(model.default_step);
    report.base_seed = config.base_seed;

    const Eigen::VectorXd initial =
        config.initial_state.size() ? config.initial_state : model.default_initial_state;
    const Trajectory truth =
        integrate(model, model.true_params, initial, report.t0, report.t1, report.step);

    std::vector<Job> jobs;
    for (std::size_t ki = 0; ki < config.noise_kinds.size(); ++ki) {
        for (std::size_t li = 0; li < config.noise_levels.size(); ++li) {
            for (std::size_t r = 0; r < static_cast<std::size_t>(config.repetitions); ++r) {
                jobs.push_back({ki, li, r});
            }
        }
    }

    std::vector<RunRecord> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            results[i] = run_single(model, truth, config, initial, report.start_params,
                                    report.step, jobs[i]);
        }
    };
    unsigned threads = config.threads ? config.threads : std::thread::hardware_concurrency();
    threads = std::clamp<unsigned>(threads, 1u, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    const std::size_t reps = static_cast<std::size_t>(config.repetitions);
    std::size_t offset = 0;
    for (std::size_t ki = 0; ki < config.noise_kinds.size(); ++ki) {
        for (std::size_t li = 0; li < config.noise_levels.size(); ++li) {
            std::vector<RunRecord> runs(std::make_move_iterator(results.begin() + static_cast<std::ptrdiff_t>(offset)),
                                        std::make_move_iterator(results.begin() + static_cast<std::ptrdiff_t>(offset + reps)));
            offset += reps;
            report.rows.push_back(aggregate(config.noise_kinds[ki], config.noise_levels[li],
                                            std::move(runs), model.param_dim));
        }
    }
    return report;
}

TableFormat parse_table_format(std::string_view text) {
    if (text == "csv") return TableFormat::csv;
    if (text == "json") return TableFormat::json;
    if (text == "text") return TableFormat::text;
    throw std::invalid_argument("unknown table format '" + std::string(text) + "'");
}

namespace {

json report_json(const ExperimentReport &report) {
    json rows = json::array();
    for (const auto &row : report.rows) {
        json runs = json::array();
        for (const auto &r : row.per_run) {
            json jr = {{"seed", r.seed},
                       {"params", vector_json(r.params)},
                       {"rmse", number_json(r.rmse)},
                       {"iterations", r.iterations},
                       {"termination", std::string(to_string(r.termination))},
                       {"failed", r.failed}};
            if (r.failed) jr["error"] = r.error;
            runs.push_back(std::move(jr));
        }
        rows.push_back({{"noise_kind", std::string(to_string(row.noise_kind))},
                        {"noise_level", row.noise_level},
                        {"mean_params", vector_json(row.mean_params)},
                        {"std_params", vector_json(row.std_params)},
                        {"mean_rmse", number_json(row.mean_rmse)},
                        {"excluded", row.excluded},
                        {"per_run", std::move(runs)}});
    }
    return {{"model", report.model_name},
            {"param_names", report.param_names},
            {"true_params", vector_json(report.true_params)},
            {"start_params", vector_json(report.start_params)},
            {"t0", report.t0},
            {"t1", report.t1},
            {"step", report.step},
            {"base_seed", report.base_seed},
            {"rows", std::move(rows)}};
}

std::string table_csv(const ExperimentReport &report) {
    std::string out = "noise_kind,noise_level";
    for (const auto &name : report.param_names) out += "," + name;
    out += ",rmse";
    for (const auto &name : report.param_names) out += "," + name + "_std";
    out += ",excluded\n";
    for (const auto &row : report.rows) {
        out += std::string(to_string(row.noise_kind)) + "," + io::format_double(row.noise_level);
        for (Eigen::Index i = 0; i < row.mean_params.size(); ++i) {
            out += "," + io::format_double(row.mean_params[i]);
        }
        out += "," + io::format_double(row.mean_rmse);
        for (Eigen::Index i = 0; i < row.std_params.size(); ++i) {
            out += "," + io::format_double(row.std_params[i]);
        }
        out += "," + std::to_string(row.excluded) + "\n";
    }
    return out;
}

// Noise level, parameter estimates and RMSE, 4 decimals, as the reference tables print them.
std::string table_text(const ExperimentReport &report) {
    constexpr std::size_t kind_w = 16, level_w = 12, col_w = 10;
    std::string out = pad_right("Noise Kind", kind_w) + pad_right("Noise Level", level_w);
    for (const auto &name : report.param_names) out += pad_left(name, col_w);
    out += pad_left("RMSE", col_w) + "\n";
    for (const auto &row : report.rows) {
        std::string line = pad_right(std::string(to_string(row.noise_kind)), kind_w) +
                           pad_right(short_number(row.noise_level), level_w);
        for (Eigen::Index i = 0; i < row.mean_params.size(); ++i) {
            line += pad_left(fixed(row.mean_params[i], 4), col_w);
        }
        line += pad_left(fixed(row.mean_rmse, 4), col_w);
        if (row.excluded) line += "  (" + std::to_string(row.excluded) + " excluded)";
        out += line + "\n";
    }
    return out;
}

} // namespace

std::string emit_table(const ExperimentReport &report, TableFormat format) {
    switch (format) {
    case TableFormat::csv: return table_csv(report);
    case TableFormat::json: return report_json(report).dump(2) + "\n";
    case TableFormat::text: return table_text(report);
    }
    return {};
}

std::string emit_runs_csv(const ExperimentReport &report) {
    std::string out = "noise_kind,noise_level,repetition,seed";
    for (const auto &name : report.param_names) out += "," + name;
    out += ",rmse,iterations,termination,failed\n";
    for (const auto &row : report.rows) {
        for (std::size_t r = 0; r < row.per_run.size(); ++r) {
            const auto &run = row.per_run[r];
            out += std::string(to_string(row.noise_kind)) + "," + io::format_double(row.noise_level) +
                   "," + std::to_string(r) + "," + std::to_string(run.seed);
            for (Eigen::Index i = 0; i < run.params.size(); ++i) {
                out += "," + io::format_double(run.params[i]);
            }
            out += "," + io::format_double(run.rmse) + "," + std::to_string(run.iterations) + "," +
                   std::string(to_string(run.termination)) + "," + (run.failed ? "1" : "0") + "\n";
        }
    }
    return out;
}

ExperimentReport parse_report_json(std::string_view text) {
    const json j = json::parse(text);
    ExperimentReport report;
    report.model_name = j.at("model").get<std::string>();
    report.param_names = j.at("param_names").get<std::vector<std::string>>();
    report.true_params = json_vector(j.at("true_params"));
    report.start_params = json_vector(j.at("start_params"));
    report.t0 = j.at("t0").get<double>();
    report.t1 = j.at("t1").get<double>();
    report.step = j.at("step").get<double>();
    report.base_seed = j.at("base_seed").get<std::uint64_t>();
    for (const auto &jr : j.at("rows")) {
        ReportRow row;
        row.noise_kind = parse_noise_kind(jr.at("noise_kind").get<std::string>());
        row.noise_level = jr.at("noise_level").get<double>();
        row.mean_params = json_vector(jr.at("mean_params"));
        row.std_params = json_vector(jr.at("std_params"));
        row.mean_rmse = json_number(jr.at("mean_rmse"));
        row.excluded = jr.at("excluded").get<std::size_t>();
        for (const auto &run : jr.at("per_run")) {
            RunRecord r;
            r.seed = run.at("seed").get<std::uint64_t>();
            r.params = json_vector(run.at("params"));
            r.rmse = json_number(run.at("rmse"));
            r.iterations = run.at("iterations").get<int>();
            r.termination = parse_termination(run.at("termination").get<std::string>());
            r.failed = run.at("failed").get<bool>();
            r.error = run.value("error", std::string{});
            row.per_run.push_back(std::move(r));
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string emit_phase_data(const std::string &model_name, const Eigen::VectorXd &params,
                            const Eigen::VectorXd &initial_state, double t0, double t1,
                            double step) {
    const ModelSpec &model = find_model(model_name);
    if (t1 == t0) {
        if (static_cast<std::size_t>(initial_state.size()) != model.state_dim) {
            throw DimensionError("initial state has wrong length");
        }
        Trajectory single{model.name, Eigen::VectorXd::Constant(1, t0), initial_state.transpose()};
        return io::trajectory_csv(single);
    }
    return io::trajectory_csv(integrate(model, params, initial_state, t0, t1, step));
}

ExperimentConfig parse_experiment_config(std::string_view json_text) {
    const json j = json::parse(json_text);
    ExperimentConfig config = default_config(j.at("model").get<std::string>());
    if (j.contains("noise_levels")) config.noise_levels = j["noise_levels"].get<std::vector<double>>();
    if (j.contains("noise_kinds")) {
        config.noise_kinds.clear();
        for (const auto &k : j["noise_kinds"]) config.noise_kinds.push_back(parse_noise_kind(k.get<std::string>()));
    }
    config.repetitions = j.value("repetitions", config.repetitions);
    config.base_seed = j.value("base_seed", config.base_seed);
    config.threads = j.value("threads", config.threads);
    if (j.contains("start_params")) config.start_params = json_vector(j["start_params"]);
    if (j.contains("initial_state")) config.initial_state = json_vector(j["initial_state"]);
    if (j.contains("t0")) config.t0 = j["t0"].get<double>();
    if (j.contains("t1")) config.t1 = j["t1"].get<double>();
    if (j.contains("step")) config.step = j["step"].get<double>();
    if (j.contains("warmup_horizons")) {
        config.warmup_horizons = j["warmup_horizons"].get<std::vector<double>>();
    }
    if (j.contains("solver")) {
        const auto &s = j["solver"];
        auto &c = config.solver;
        c.initial_radius = s.value("initial_radius", c.initial_radius);
        c.max_radius = s.value("max_radius", 100.0 * c.initial_radius);
        c.tolerance = s.value("tolerance", c.tolerance);
        c.max_iterations = s.value("max_iterations", c.max_iterations);
        if (s.contains("acceptance_threshold")) {
            const auto &a = s["acceptance_threshold"];
            c.acceptance_threshold = a.is_string() && a.get<std::string>() == "-inf"
                                         ? -std::numeric_limits<double>::infinity()
                                         : a.get<double>();
        }
    }
    config.validate();
    return config;
}

std::string experiment_config_json(const ExperimentConfig &config) {
    json kinds = json::array();
    for (auto k : config.noise_kinds) kinds.push_back(std::string(to_string(k)));
    const auto &s = config.solver;
    json solver = {{"initial_radius", s.initial_radius},
                   {"max_radius", s.max_radius},
                   {"tolerance", s.tolerance},
                   {"max_iterations", s.max_iterations},
                   {"acceptance_threshold", std::isfinite(s.acceptance_threshold)
                                                ? json(s.acceptance_threshold)
                                                : json("-inf")}};
    json j = {{"model", config.model_name},
              {"noise_levels", config.noise_levels},
              {"noise_kinds", kinds},
              {"repetitions", config.repetitions},
              {"base_seed", config.base_seed},
              {"threads", config.threads},
              {"warmup_horizons", config.warmup_horizons},
              {"solver", solver}};
    if (config.start_params.size()) j["start_params"] = vector_json(config.start_params);
    if (config.initial_state.size()) j["initial_state"] = vector_json(config.initial_state);
    if (config.t0) j["t0"] = *config.t0;
    if (config.t1) j["t1"] = *config.t1;
    if (config.step) j["step"] = *config.step;
    return j.dump(2) + "\n";
}

bool operator==(const RunRecord &a, const RunRecord &b) {
    return a.seed == b.seed && same(a.params, b.params) && same(a.rmse, b.rmse) &&
           a.iterations == b.iterations && a.termination == b.termination &&
           a.failed == b.failed && a.error == b.error;
}

bool operator==(const ReportRow &a, const ReportRow &b) {
    return a.noise_kind == b.noise_kind && a.noise_level == b.noise_level &&
           same(a.mean_params, b.mean_params) && same(a.std_params, b.std_params) &&
           same(a.mean_rmse, b.mean_rmse) && a.excluded == b.excluded && a.per_run == b.per_run;
}

bool operator==(const ExperimentReport &a, const ExperimentReport &b) {
    return a.model_name == b.model_name && a.param_names == b.param_names &&
           same(a.true_params, b.true_params) && same(a.start_params, b.start_params) &&
           a.t0 == b.t0 && a.t1 == b.t1 && a.step == b.step && a.base_seed == b.base_seed &&
           a.rows == b.rows;
}

} // namespace paramest
