// paramest: simulate benchmark systems, corrupt them with noise and recover
// their parameters with the trust-region solver.
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure.

#include "paramest/dynamics.hpp"
#include "paramest/errors.hpp"
#include "paramest/harness.hpp"
#include "paramest/integrator.hpp"
#include "paramest/io.hpp"
#include "paramest/noise.hpp"
#include "paramest/objective.hpp"
#include "paramest/trust_region.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace paramest;

namespace {

constexpr int kUsageError = 1;
constexpr int kNumericalError = 2;

Eigen::VectorXd to_vector(const std::vector<double> &v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string level_tag(double level) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", level);
    return buf;
}

struct SimulateArgs {
    std::string model;
    std::vector<double> params, init;
    std::optional<double> t0, t1, step;
    std::string out;
};

struct CorruptArgs {
    std::string in, out, noise = "white", model;
    double level = 0.0;
    std::uint64_t seed = 0;
};

struct EstimateArgs {
    std::string model, data;
    std::vector<double> start, init, warmup;
    double radius = 0.1, tol = 1e-6;
    std::optional<double> max_radius;
    int max_iter = 500;
    bool json = false, trace = false;
};

struct ExperimentArgs {
    std::string config, out = ".";
    unsigned threads = 0;
};

int list_models() {
    for (const auto &m : registry()) {
        std::cout << m.name << "  n=" << m.state_dim << "  p=" << m.param_dim << "  true:";
        for (std::size_t i = 0; i < m.param_dim; ++i) {
            std::cout << ' ' << m.param_names[i] << '=' << io::format_double(m.true_params[static_cast<Eigen::Index>(i)]);
        }
        std::cout << "  init:";
        for (Eigen::Index i = 0; i < m.default_initial_state.size(); ++i) {
            std::cout << ' ' << m.default_initial_state[i];
        }
        std::cout << "  span: [" << m.default_time_span.t0 << ", " << m.default_time_span.t1
                  << "] step " << m.default_step << '\n';
    }
    return 0;
}

int simulate(const SimulateArgs &a, bool phase) {
    const auto &model = find_model(a.model);
    const auto params = a.params.empty() ? model.true_params : to_vector(a.params);
    const auto init = a.init.empty() ? model.default_initial_state : to_vector(a.init);
    const double t0 = a.t0.value_or(model.default_time_span.t0);
    const double t1 = a.t1.value_or(model.default_time_span.t1);
    const double step = a.step.value_or(model.default_step);
    io::write_file(a.out, emit_phase_data(model.name, params, init, t0, t1, step));
    if (!phase) {
        nlohmann::json meta = {{"model", model.name},
                               {"params", std::vector<double>(params.data(), params.data() + params.size())}};
        io::write_file(io::metadata_path(a.out), meta.dump(2) + "\n");
    }
    return 0;
}

int corrupt_cmd(const CorruptArgs &a) {
    std::string model = a.model;
    const auto sidecar = io::metadata_path(a.in);
    if (model.empty() && fs::exists(sidecar)) {
        model = nlohmann::json::parse(io::read_file(sidecar)).value("model", std::string{});
    }
    const Trajectory traj = io::parse_trajectory_csv(io::read_file(a.in), model);
    const MeasurementSet m = corrupt(traj, NoiseSpec{parse_noise_kind(a.noise), a.level, a.seed});
    io::write_file(a.out, io::measurement_csv(m));
    io::write_file(io::metadata_path(a.out), io::measurement_metadata_json(m));
    return 0;
}

int estimate_cmd(const EstimateArgs &a) {
    const auto &model = find_model(a.model);
    const auto sidecar = io::metadata_path(a.data);
    const std::string meta = fs::exists(sidecar) ? io::read_file(sidecar) : std::string{};
    MeasurementSet m = io::parse_measurement_csv(io::read_file(a.data), meta);
    if (m.size() < 2) throw std::invalid_argument("data file needs at least two rows");
    const double step = m.times[1] - m.times[0];

    ObjectiveContext ctx{model, std::move(m),
                         a.init.empty() ? model.default_initial_state : to_vector(a.init), step};
    ctx.validate();

    TrustRegionConfig config;
    config.initial_radius = a.radius;
    config.max_radius = a.max_radius.value_or(100.0 * a.radius);
    config.tolerance = a.tol;
    config.max_iterations = a.max_iter;
    const Eigen::VectorXd start = a.start.empty() ? default_start_params(model.name) : to_vector(a.start);
    if (static_cast<std::size_t>(start.size()) != model.param_dim) {
        throw DimensionError("--start needs " + std::to_string(model.param_dim) + " values");
    }
    const SolveReport report = estimate_with_warmup(ctx, start, config, a.warmup);
    if (a.json) {
        std::cout << io::solve_report_json(report, model.param_names, a.trace);
    } else {
        std::cout << io::solve_report_text(report, model.param_names);
        std::cout << "rmse:        "
                  << io::format_double(rmse(fitted_trajectory(ctx, report.final_params), ctx.measurements))
                  << '\n';
    }
    return 0;
}

int experiment_cmd(const ExperimentArgs &a) {
    ExperimentConfig config = parse_experiment_config(io::read_file(a.config));
    if (a.threads) config.threads = a.threads;
    const ExperimentReport report = run_experiment(config);

    const fs::path dir = a.out;
    fs::create_directories(dir);
    io::write_file(dir / "config.json", experiment_config_json(config));
    io::write_file(dir / "table.csv", emit_table(report, TableFormat::csv));
    io::write_file(dir / "table.json", emit_table(report, TableFormat::json));
    io::write_file(dir / "table.txt", emit_table(report, TableFormat::text));
    io::write_file(dir / "runs.csv", emit_runs_csv(report));

    // Plot data: truth, and the noisy data and fit of repetition 0 for every row.
    const auto &model = find_model(report.model_name);
    const Eigen::VectorXd init =
        config.initial_state.size() ? config.initial_state : model.default_initial_state;
    const Trajectory truth = integrate(model, model.true_params, init, report.t0, report.t1, report.step);
    io::write_file(dir / "truth.csv", io::trajectory_csv(truth));
    for (const auto &row : report.rows) {
        const auto &run = row.per_run.front();
        const std::string tag = std::string(to_string(row.noise_kind)) + "_" + level_tag(row.noise_level);
        io::write_file(dir / ("data_" + tag + ".csv"),
                       io::measurement_csv(corrupt(truth, {row.noise_kind, row.noise_level, run.seed})));
        if (!run.failed) {
            io::write_file(dir / ("fit_" + tag + ".csv"),
                           io::trajectory_csv(integrate(model, run.params, init, report.t0, report.t1, report.step)));
        }
    }

    std::cout << emit_table(report, TableFormat::text);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Trust-region parameter estimation for nonlinear ODE benchmarks"};
    app.require_subcommand(1);

    app.add_subcommand("list-models", "Print the model registry");

    SimulateArgs sim;
    auto *simulate_cmd = app.add_subcommand("simulate", "Write a clean trajectory CSV");
    simulate_cmd->add_option("--model", sim.model)->required();
    simulate_cmd->add_option("--params", sim.params);
    simulate_cmd->add_option("--init", sim.init);
    simulate_cmd->add_option("--t0", sim.t0);
    simulate_cmd->add_option("--t1", sim.t1);
    simulate_cmd->add_option("--step", sim.step);
    simulate_cmd->add_option("--out", sim.out)->required();

    SimulateArgs ph;
    auto *phase_cmd = app.add_subcommand("phase", "Write phase-portrait data");
    phase_cmd->add_option("--model", ph.model)->required();
    phase_cmd->add_option("--params", ph.params);
    phase_cmd->add_option("--init", ph.init);
    phase_cmd->add_option("--t0", ph.t0);
    phase_cmd->add_option("--t1", ph.t1);
    phase_cmd->add_option("--step", ph.step);
    phase_cmd->add_option("--out", ph.out)->required();

    CorruptArgs cor;
    auto *corrupt_sub = app.add_subcommand("corrupt", "Add noise to a trajectory CSV");
    corrupt_sub->add_option("--in", cor.in)->required()->check(CLI::ExistingFile);
    corrupt_sub->add_option("--noise", cor.noise)->check(CLI::IsMember({"white", "white_gaussian", "pink"}));
    corrupt_sub->add_option("--level", cor.level)->required()->check(CLI::NonNegativeNumber);
    corrupt_sub->add_option("--seed", cor.seed);
    corrupt_sub->add_option("--model", cor.model, "Model name recorded in the metadata");
    corrupt_sub->add_option("--out", cor.out)->required();

    EstimateArgs est;
    auto *estimate_sub = app.add_subcommand("estimate", "Fit parameters to a measurement CSV");
    estimate_sub->add_option("--model", est.model)->required();
    estimate_sub->add_option("--data", est.data)->required()->check(CLI::ExistingFile);
    estimate_sub->add_option("--start", est.start);
    estimate_sub->add_option("--init", est.init, "Initial state (default: model default)");
    estimate_sub->add_option("--radius", est.radius)->check(CLI::PositiveNumber);
    estimate_sub->add_option("--tol", est.tol)->check(CLI::PositiveNumber);
    estimate_sub->add_option("--max-radius", est.max_radius)->check(CLI::PositiveNumber);
    estimate_sub->add_option("--max-iter", est.max_iter)->check(CLI::PositiveNumber);
    estimate_sub->add_option("--warmup", est.warmup,
                             "Prefix horizons fitted first, each warm-starting the next");
    estimate_sub->add_flag("--json", est.json);
    estimate_sub->add_flag("--trace", est.trace, "Include the iteration trace in JSON output");

    ExperimentArgs exp;
    auto *experiment_sub = app.add_subcommand("experiment", "Run a full noise-level experiment");
    experiment_sub->add_option("--config", exp.config)->required()->check(CLI::ExistingFile);
    experiment_sub->add_option("--out", exp.out);
    experiment_sub->add_option("--threads", exp.threads);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (app.got_subcommand("list-models")) return list_models();
        if (simulate_cmd->parsed()) return simulate(sim, false);
        if (phase_cmd->parsed()) return simulate(ph, true);
        if (corrupt_sub->parsed()) return corrupt_cmd(cor);
        if (estimate_sub->parsed()) return estimate_cmd(est);
        if (experiment_sub->parsed()) return experiment_cmd(exp);
    } catch (const DivergenceError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const ObjectiveError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const InvalidModelError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
    return kUsageError;
}
