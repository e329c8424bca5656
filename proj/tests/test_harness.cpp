#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "paramest/dynamics.hpp"
#include "paramest/errors.hpp"
#include "paramest/harness.hpp"
#include "paramest/integrator.hpp"
#include "paramest/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

using namespace paramest;

namespace {

ExperimentConfig small_config(const std::string &model, std::vector<double> levels, int reps) {
    auto c = default_config(model);
    c.noise_levels = std::move(levels);
    c.repetitions = reps;
    c.base_seed = 42;
    c.threads = 1;
    return c;
}

std::vector<std::string> lines(const std::string &text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

// Upward zero crossings of the first component, linearly interpolated.
std::vector<double> upward_crossings(const Trajectory &t) {
    std::vector<double> out;
    for (Eigen::Index j = 1; j < static_cast<Eigen::Index>(t.size()); ++j) {
        const double a = t.states(j - 1, 0), b = t.states(j, 0);
        if (a < 0.0 && b >= 0.0) out.push_back(t.times[j - 1] + (t.times[j] - t.times[j - 1]) * a / (a - b));
    }
    return out;
}

} // namespace

TEST_CASE("noiseless self-consistency") {
    for (const std::string name : {"linear_oscillator_2d", "cubic_oscillator_2d", "linear_3d", "van_der_pol"}) {
        CAPTURE(name);
        const auto rep = run_experiment(small_config(name, {0.0}, 1));
        REQUIRE(rep.rows.size() == 1);
        const auto &row = rep.rows[0];
        CHECK(row.excluded == 0);
        CHECK((row.mean_params - find_model(name).true_params).cwiseAbs().maxCoeff() <= 1e-5);
        CHECK(row.mean_rmse <= 1e-8);
        CHECK(row.std_params.isZero());
    }
}

TEST_CASE("report means match per-run records") {
    const auto rep = run_experiment(small_config("linear_oscillator_2d", {1e-3, 1e-2}, 4));
    REQUIRE(rep.rows.size() == 2);
    for (const auto &row : rep.rows) {
        REQUIRE(row.per_run.size() == 4);
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(4);
        double rmse_sum = 0.0;
        for (const auto &r : row.per_run) {
            sum += r.params;
            rmse_sum += r.rmse;
        }
        CHECK((sum / 4.0 - row.mean_params).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(std::abs(rmse_sum / 4.0 - row.mean_rmse) <= 1e-12);
        Eigen::VectorXd ss = Eigen::VectorXd::Zero(4);
        for (const auto &r : row.per_run) ss += (r.params - row.mean_params).cwiseAbs2();
        CHECK(((ss / 3.0).cwiseSqrt() - row.std_params).cwiseAbs().maxCoeff() <= 1e-12);
    }
    // Distinct repetitions see distinct noise.
    CHECK(rep.rows[0].per_run[0].seed != rep.rows[0].per_run[1].seed);
    CHECK(rep.rows[0].per_run[0].seed != rep.rows[1].per_run[0].seed);
}

TEST_CASE("reports are reproducible and independent of scheduling") {
    auto cfg = small_config("van_der_pol", {1e-3, 1e-1}, 3);
    cfg.noise_kinds = {NoiseKind::white_gaussian, NoiseKind::pink};
    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg);
    CHECK(a == b);
    CHECK(emit_table(a, TableFormat::json) == emit_table(b, TableFormat::json));
    cfg.threads = 4;
    const auto c = run_experiment(cfg);
    CHECK(a == c);
    CHECK(emit_runs_csv(a) == emit_runs_csv(c));

    cfg.base_seed = 43;
    CHECK_FALSE(run_experiment(cfg) == a);
}

TEST_CASE("RMSE tracks the noise level and accuracy degrades with noise") {
    const std::vector<double> levels{1e-4, 1e-3, 1e-2, 1e-1};
    for (const std::string name : {"linear_oscillator_2d", "van_der_pol"}) {
        CAPTURE(name);
        const auto rep = run_experiment(small_config(name, levels, 3));
        std::vector<double> err;
        for (const auto &row : rep.rows) {
            CAPTURE(row.noise_level);
            CHECK(row.mean_rmse / row.noise_level >= 0.8);
            CHECK(row.mean_rmse / row.noise_level <= 1.2);
            err.push_back((row.mean_params - rep.true_params).cwiseAbs().maxCoeff());
        }
        for (std::size_t i = 1; i < err.size(); ++i) CHECK(err[i] >= 0.8 * err[i - 1]);
    }
}

TEST_CASE("failed repetitions are excluded and counted") {
    auto cfg = small_config("linear_oscillator_2d", {1e-3}, 2);
    cfg.start_params = Eigen::Vector4d(1e3, 2.0, -2.0, -0.1); // blows up immediately
    const auto rep = run_experiment(cfg);
    const auto &row = rep.rows[0];
    CHECK(row.excluded == 2);
    CHECK(std::isnan(row.mean_rmse));
    CHECK(row.mean_params.array().isNaN().all());
    for (const auto &r : row.per_run) {
        CHECK(r.failed);
        CHECK_FALSE(r.error.empty());
    }
    // Failure markers survive the JSON round trip.
    CHECK(parse_report_json(emit_table(rep, TableFormat::json)) == rep);
}

TEST_CASE("config validation") {
    auto cfg = default_config("van_der_pol");
    CHECK(cfg.noise_levels == std::vector<double>{1e-4, 1e-3, 1e-2, 1e-1});
    CHECK(cfg.repetitions == 10);
    CHECK(cfg.solver.initial_radius == 0.1);
    CHECK(cfg.solver.tolerance == 1e-6);
    CHECK(default_start_params("van_der_pol")[0] == 1.35);
    CHECK(default_config("lorenz").warmup_horizons.size() == 2);
    CHECK(cfg.warmup_horizons.empty());

    auto bad = cfg;
    bad.repetitions = 0;
    CHECK_THROWS(run_experiment(bad));
    bad = cfg;
    bad.noise_levels = {-1e-3};
    CHECK_THROWS(run_experiment(bad));
    bad = cfg;
    bad.start_params = Eigen::Vector2d(1.0, 2.0);
    CHECK_THROWS_AS(run_experiment(bad), DimensionError);
    CHECK_THROWS_AS(run_experiment(default_config("duffing")), ModelNotFoundError);

    const auto cmp = noise_comparison_config("cubic_oscillator_2d");
    CHECK(cmp.noise_levels == std::vector<double>{0.01});
    CHECK(cmp.noise_kinds.size() == 2);
}

TEST_CASE("experiment config text round trip") {
    const auto parsed = parse_experiment_config(R"({
        "model": "linear_3d",
        "noise_levels": [0.001, 0.1],
        "noise_kinds": ["white", "pink"],
        "repetitions": 3,
        "base_seed": 7,
        "t1": 10,
        "solver": {"initial_radius": 0.5, "acceptance_threshold": "-inf"}
    })");
    CHECK(parsed.model_name == "linear_3d");
    CHECK(parsed.noise_levels == std::vector<double>{0.001, 0.1});
    CHECK(parsed.noise_kinds == std::vector<NoiseKind>{NoiseKind::white_gaussian, NoiseKind::pink});
    CHECK(parsed.repetitions == 3);
    CHECK(parsed.base_seed == 7);
    CHECK(parsed.t1.value() == 10.0);
    CHECK_FALSE(parsed.t0.has_value());
    CHECK(parsed.solver.initial_radius == 0.5);
    CHECK(parsed.solver.max_radius == 50.0);
    CHECK(std::isinf(parsed.solver.acceptance_threshold));

    const auto again = parse_experiment_config(experiment_config_json(parsed));
    CHECK(again.noise_levels == parsed.noise_levels);
    CHECK(again.noise_kinds == parsed.noise_kinds);
    CHECK(again.t1 == parsed.t1);
    CHECK(again.solver.max_radius == parsed.solver.max_radius);
    CHECK(again.solver.acceptance_threshold == parsed.solver.acceptance_threshold);

    CHECK_THROWS(parse_experiment_config(R"({"noise_levels": [0.1]})"));
    CHECK_THROWS(parse_experiment_config(R"({"model": "van_der_pol", "repetitions": 0})"));
}

TEST_CASE("empty report renders a header only") {
    ExperimentReport rep;
    rep.model_name = "linear_oscillator_2d";
    rep.param_names = {"a", "b", "c", "d"};
    for (auto fmt : {TableFormat::csv, TableFormat::text}) {
        const auto out = lines(emit_table(rep, fmt));
        REQUIRE(out.size() == 1);
        std::string header = out[0];
        std::transform(header.begin(), header.end(), header.begin(), [](unsigned char c) { return std::tolower(c); });
        CHECK(header.find("rmse") != std::string::npos);
    }
    CHECK(lines(emit_table(rep, TableFormat::csv))[0] == "noise_kind,noise_level,a,b,c,d,rmse,a_std,b_std,c_std,d_std,excluded");
}

TEST_CASE("single row renders four decimals") {
    ExperimentReport rep;
    rep.model_name = "linear_oscillator_2d";
    rep.param_names = {"a", "b", "c", "d"};
    ReportRow row;
    row.noise_level = 1e-4;
    row.mean_params = Eigen::Vector4d(-0.09996, 2.00004, -2.0, -0.1);
    row.std_params = Eigen::Vector4d::Zero();
    row.mean_rmse = 0.000101;
    rep.rows.push_back(row);
    const auto out = lines(emit_table(rep, TableFormat::text));
    REQUIRE(out.size() == 2);
    std::istringstream fields(out[1]);
    std::vector<std::string> cells;
    for (std::string c; fields >> c;) cells.push_back(c);
    REQUIRE(cells.size() == 7);
    CHECK(cells[0] == "white_gaussian");
    CHECK(cells[1] == "0.0001");
    CHECK(cells[2] == "-0.1000");
    CHECK(cells[3] == "2.0000");
    CHECK(cells[4] == "-2.0000");
    CHECK(cells[5] == "-0.1000");
    CHECK(cells[6] == "0.0001");
    CHECK(lines(emit_table(rep, TableFormat::csv)).size() == 2);
}

TEST_CASE("JSON report round trip") {
    auto cfg = small_config("cubic_oscillator_2d", {1e-2}, 2);
    cfg.noise_kinds = {NoiseKind::pink};
    const auto rep = run_experiment(cfg);
    const auto back = parse_report_json(emit_table(rep, TableFormat::json));
    CHECK(back == rep);
    CHECK(back.rows[0].per_run[1].params == rep.rows[0].per_run[1].params);
}

TEST_CASE("Lorenz phase data stays on the attractor") {
    const auto &m = find_model("lorenz");
    const auto csv = emit_phase_data("lorenz", m.true_params, m.default_initial_state, 0.0, 25.0, 0.01);
    const auto traj = io::parse_trajectory_csv(csv, "lorenz");
    CHECK(traj.size() == 2501);
    CHECK(traj.states.allFinite());
    CHECK(traj.states.col(0).cwiseAbs().maxCoeff() <= 25.0);
    CHECK(traj.states.col(2).minCoeff() >= 0.0);
    CHECK(traj.states.col(2).maxCoeff() <= 55.0);
}

TEST_CASE("Van der Pol phase data closes on the limit cycle") {
    const auto &m = find_model("van_der_pol");
    // Period from a fine reference integration.
    const auto ref = integrate(m, m.true_params, m.default_initial_state, 0.0, 60.0, 1e-3);
    const auto cross = upward_crossings(ref);
    REQUIRE(cross.size() >= 4);
    const double period = (cross.back() - cross[cross.size() - 3]) / 2.0;
    CHECK(period > 6.0);
    CHECK(period < 9.0);

    const auto traj = io::parse_trajectory_csv(
        emit_phase_data("van_der_pol", m.true_params, m.default_initial_state, 0.0, 25.0, 0.01));
    REQUIRE(traj.size() == 2501);
    const auto lag = static_cast<Eigen::Index>(std::lround(period / 0.01));
    const Eigen::Index first = static_cast<Eigen::Index>(traj.size()) - 1000;
    for (Eigen::Index j = first; j + lag + 2 < static_cast<Eigen::Index>(traj.size()); ++j) {
        double nearest = INFINITY;
        for (Eigen::Index k = j + lag - 2; k <= j + lag + 2; ++k)
            nearest = std::min(nearest, (traj.states.row(j) - traj.states.row(k)).norm());
        CAPTURE(j);
        REQUIRE(nearest < 0.05);
    }
}

TEST_CASE("phase data edge cases") {
    const auto &m = find_model("van_der_pol");
    const auto single = lines(emit_phase_data("van_der_pol", m.true_params, m.default_initial_state, 2.0, 2.0, 0.01));
    REQUIRE(single.size() == 2);
    CHECK(single[1].rfind("2,", 0) == 0);
    CHECK_THROWS_AS(emit_phase_data("pendulum", m.true_params, m.default_initial_state, 0.0, 1.0, 0.01),
                    ModelNotFoundError);
}

TEST_CASE("warm-up horizons recover short-horizon Lorenz") {
    const auto &m = find_model("lorenz");
    const auto truth = integrate(m, m.true_params, m.default_initial_state, 0.0, 3.0, 0.01);
    const ObjectiveContext ctx{m, corrupt(truth, {NoiseKind::white_gaussian, 1e-3, 5}), m.default_initial_state, 0.01};
    const auto rep = estimate_with_warmup(ctx, default_start_params("lorenz"), default_config("lorenz").solver, {1.0});
    CHECK(((rep.final_params - m.true_params).array() / m.true_params.array()).abs().maxCoeff() <= 0.02);
    CHECK(rep.iterations >= static_cast<int>(rep.trace.size()) - 1);

    const auto h = head(ctx.measurements, 101);
    CHECK(h.size() == 101);
    CHECK(h.times[100] == ctx.measurements.times[100]);
    CHECK_THROWS(head(ctx.measurements, ctx.measurements.size() + 1));
}

TEST_CASE("repetition seeds") {
    CHECK(repetition_seed(0, 0, 0, 0) != repetition_seed(0, 0, 0, 1));
    CHECK(repetition_seed(0, 0, 1, 0) != repetition_seed(0, 1, 0, 0));
    CHECK((repetition_seed(5, 1, 2, 3) ^ repetition_seed(0, 1, 2, 3)) == 5u);
}
