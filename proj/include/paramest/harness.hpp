#pragma once

#include "paramest/noise.hpp"
#include "paramest/trust_region.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace paramest {

struct ExperimentConfig {
    std::string model_name;
    std::vector<double> noise_levels{1e-4, 1e-3, 1e-2, 1e-1};
    std::vector<NoiseKind> noise_kinds{NoiseKind::white_gaussian};
    int repetitions = 10;
    std::uint64_t base_seed = 0;
    TrustRegionConfig solver;
    Eigen::VectorXd start_params; ///< empty: default_start_params(model)
    Eigen::VectorXd initial_state; ///< empty: model default
    std::optional<double> t0;
    std::optional<double> t1;
    std::optional<double> step;
    /// Prefix horizons (durations from t0) fitted in order before the full span, each
    /// warm-starting the next. Empty for every model except lorenz.
    std::vector<double> warmup_horizons;
    unsigned threads = 0; ///< 0: std::thread::hardware_concurrency()

    void validate() const;
};

/// Standard defaults for `model_name`: white noise at the four standard levels,
/// 10 repetitions, radius 0.1, tolerance 1e-6.
ExperimentConfig default_config(const std::string &model_name);

/// White vs pink at a single level (0.01 by default), 10 repetitions each.
ExperimentConfig noise_comparison_config(const std::string &model_name, double level = 0.01);

/// mu0 = 1.35 for van_der_pol; true parameters scaled by 0.9 for every other model.
Eigen::VectorXd default_start_params(const std::string &model_name);

/// Fits the measurement prefixes [t0, t0 + h] for each warm-up horizon h shorter than the
/// data span, then the full set, each solve starting where the previous one stopped.
/// The returned report is the final solve's, with `iterations` summed over all stages.
SolveReport estimate_with_warmup(const ObjectiveContext &ctx, const Eigen::VectorXd &start,
                                 const TrustRegionConfig &solver,
                                 const std::vector<double> &warmup_horizons);

/// First `count` time points of a measurement set.
MeasurementSet head(const MeasurementSet &measurements, std::size_t count);

/// base_seed XOR a SplitMix64 hash of (kind index, level index, repetition).
std::uint64_t repetition_seed(std::uint64_t base_seed, std::size_t kind_index,
                              std::size_t level_index, std::size_t repetition);

struct RunRecord {
    std::uint64_t seed = 0;
    Eigen::VectorXd params;
    double rmse = 0.0;
    int iterations = 0;
    Termination termination = Termination::max_iterations;
    bool failed = false;
    std::string error;
};

struct ReportRow {
    NoiseKind noise_kind = NoiseKind::white_gaussian;
    double noise_level = 0.0;
    Eigen::VectorXd mean_params;
    Eigen::VectorXd std_params; ///< sample standard deviation, 0 for a single run
    double mean_rmse = 0.0;
    std::size_t excluded = 0; ///< failed repetitions left out of the means
    std::vector<RunRecord> per_run;
};

struct ExperimentReport {
    std::string model_name;
    std::vector<std::string> param_names;
    Eigen::VectorXd true_params;
    Eigen::VectorXd start_params;
    double t0 = 0.0;
    double t1 = 0.0;
    double step = 0.0;
    std::uint64_t base_seed = 0;
    std::vector<ReportRow> rows;
};

/// Runs every (kind, level, repetition) estimation. Repetitions may run on several
/// threads; results are reduced in (kind, level, repetition) order.
ExperimentReport run_experiment(const ExperimentConfig &config);

enum class TableFormat { csv, json, text };
TableFormat parse_table_format(std::string_view text);

std::string emit_table(const ExperimentReport &report, TableFormat format);
/// One line per repetition: kind, level, repetition, seed, params, rmse, iterations, termination.
std::string emit_runs_csv(const ExperimentReport &report);
ExperimentReport parse_report_json(std::string_view text);

/// Trajectory CSV for plotting. A zero-length span (t1 == t0) yields the single row at t0.
std::string emit_phase_data(const std::string &model_name, const Eigen::VectorXd &params,
                            const Eigen::VectorXd &initial_state, double t0, double t1,
                            double step);

ExperimentConfig parse_experiment_config(std::string_view json_text);
std::string experiment_config_json(const ExperimentConfig &config);

bool operator==(const RunRecord &a, const RunRecord &b);
bool operator==(const ReportRow &a, const ReportRow &b);
bool operator==(const ExperimentReport &a, const ExperimentReport &b);

} // namespace paramest
