#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "paramest/errors.hpp"
#include "paramest/integrator.hpp"
#include "paramest/io.hpp"

#include <cmath>

using namespace paramest;

namespace {

ModelSpec scalar_model(std::string name, RhsFunction rhs) {
    ModelSpec m;
    m.name = std::move(name);
    m.state_dim = 1;
    m.param_dim = 1;
    m.rhs = std::move(rhs);
    m.param_names = {"k"};
    m.true_params = Eigen::VectorXd::Ones(1);
    m.default_initial_state = Eigen::VectorXd::Ones(1);
    m.default_time_span = {0.0, 1.0};
    return m;
}

double max_abs_diff_on_shared_grid(const Trajectory &coarse, const Trajectory &fine) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < coarse.states.rows(); ++j) {
        worst = std::max(worst, (coarse.states.row(j) - fine.states.row(2 * j)).cwiseAbs().maxCoeff());
    }
    return worst;
}

} // namespace

TEST_CASE("grid size") {
    CHECK(grid_size(0.0, 25.0, 0.01) == 2501);
    CHECK(grid_size(0.0, 3.0, 0.01) == 301);
    CHECK(grid_size(0.0, 1.0, 0.3) == 4);
    CHECK(grid_size(2.0, 2.0, 0.1) == 1);
    CHECK_THROWS(grid_size(0.0, 1.0, 0.0));
}

TEST_CASE("zero vector field leaves the state unchanged") {
    ModelSpec m = scalar_model("zero", [](auto, double, auto, std::span<double> out) { out[0] = 0.0; });
    m.state_dim = 1;
    const auto traj = integrate(m, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Constant(1, 3.25), 0.0, 2.0, 0.1);
    CHECK(traj.size() == 21);
    CHECK((traj.states.array() == 3.25).all());
}

TEST_CASE("one RK4 step of dx/dt = -x matches exp(-h)") {
    const auto m = scalar_model("decay", [](std::span<const double> s, double, auto, std::span<double> out) {
        out[0] = -s[0];
    });
    const auto traj = integrate(m, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), 0.0, 0.01, 0.01);
    REQUIRE(traj.size() == 2);
    CHECK(std::abs(traj.states(1, 0) - std::exp(-0.01)) <= 1e-10);
    CHECK(traj.times[1] == 0.01);
}

TEST_CASE("Van der Pol settles on a limit cycle of amplitude ~2") {
    const auto &vdp = find_model("van_der_pol");
    auto amplitude = [&](double step) {
        const auto traj = integrate(vdp, vdp.true_params, vdp.default_initial_state, 0.0, 25.0, step);
        double amp = 0.0;
        for (Eigen::Index j = 0; j < traj.states.rows(); ++j) {
            if (traj.times[j] >= 15.0) amp = std::max(amp, std::abs(traj.states(j, 0)));
        }
        return amp;
    };
    const double amp = amplitude(0.01);
    const double reference = amplitude(0.0001);
    CHECK(amp >= 1.9);
    CHECK(amp <= 2.1);
    CHECK(reference >= 1.9);
    CHECK(reference <= 2.1);
    CHECK(std::abs(amp - reference) < 1e-3);
}

TEST_CASE("linear oscillator decays") {
    const auto &m = find_model("linear_oscillator_2d");
    const auto traj = integrate(m, m.true_params, m.default_initial_state, 0.0, 25.0, 0.01);
    const double n0 = traj.states.row(0).norm();
    const double n1 = traj.states.row(traj.states.rows() - 1).norm();
    CHECK(n1 < n0);
    // |x(t)| = 2 exp(-0.1 t) exactly for this rotation-plus-decay system.
    CHECK(n1 == doctest::Approx(2.0 * std::exp(-2.5)).epsilon(1e-8));
}

TEST_CASE("fourth-order convergence under step halving") {
    for (const char *name : {"linear_oscillator_2d", "cubic_oscillator_2d", "linear_3d", "van_der_pol"}) {
        CAPTURE(name);
        const auto &m = find_model(name);
        const auto a = integrate(m, m.true_params, m.default_initial_state, 0.0, 5.0, 0.04);
        const auto b = integrate(m, m.true_params, m.default_initial_state, 0.0, 5.0, 0.02);
        const auto c = integrate(m, m.true_params, m.default_initial_state, 0.0, 5.0, 0.01);
        const double e1 = max_abs_diff_on_shared_grid(a, b);
        const double e2 = max_abs_diff_on_shared_grid(b, c);
        CHECK(e1 / e2 >= 8.0);
    }
}

TEST_CASE("linear_3d z component is an exact exponential") {
    const auto &m = find_model("linear_3d");
    const auto traj = integrate(m, m.true_params, m.default_initial_state, 0.0, 25.0, 0.01);
    for (Eigen::Index j = 0; j < traj.states.rows(); ++j) {
        const double exact = std::exp(-0.3 * traj.times[j]);
        CHECK(std::abs(traj.states(j, 2) - exact) <= 1e-8 * exact);
    }
}

TEST_CASE("integration is bitwise deterministic") {
    const auto &m = find_model("lorenz");
    const auto a = integrate(m, m.true_params, m.default_initial_state, 0.0, 25.0, 0.01);
    const auto b = integrate(m, m.true_params, m.default_initial_state, 0.0, 25.0, 0.01);
    CHECK(a.times == b.times);
    CHECK(a.states == b.states);
    CHECK(a.model_name == "lorenz");
}

TEST_CASE("uniform grid") {
    const auto &m = find_model("van_der_pol");
    const auto traj = integrate(m, m.true_params, m.default_initial_state, 0.0, 25.0, 0.01);
    REQUIRE(traj.size() == 2501);
    const double h0 = traj.times[1] - traj.times[0];
    for (Eigen::Index j = 1; j < traj.times.size(); ++j) {
        CHECK(std::abs((traj.times[j] - traj.times[j - 1]) - h0) <= 1e-12);
    }
    CHECK(traj.times[2500] == doctest::Approx(25.0).epsilon(1e-14));
}

TEST_CASE("divergence is reported with the first bad index") {
    // dx/dt = x^2 from x = 1 blows up at t = 1.
    const auto m = scalar_model("blowup", [](std::span<const double> s, double, auto, std::span<double> out) {
        out[0] = s[0] * s[0];
    });
    try {
        integrate(m, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), 0.0, 2.0, 0.01);
        FAIL("expected divergence");
    } catch (const DivergenceError &e) {
        CHECK(e.time_index() >= 95);
        CHECK(e.time_index() <= 110);
    }
    try {
        integrate(m, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Constant(1, NAN), 0.0, 2.0, 0.01);
        FAIL("expected divergence");
    } catch (const DivergenceError &e) {
        CHECK(e.time_index() == 0);
    }
}

TEST_CASE("precondition violations") {
    const auto &m = find_model("lorenz");
    CHECK_THROWS_AS(integrate(m, m.true_params, m.default_initial_state, 0.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(integrate(m, m.true_params, m.default_initial_state, 1.0, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(integrate(m, m.true_params, m.default_initial_state, 0.0, 0.05, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(integrate(m, Eigen::VectorXd::Ones(2), m.default_initial_state, 0.0, 1.0, 0.1), DimensionError);
    CHECK_THROWS_AS(integrate(m, m.true_params, Eigen::VectorXd::Ones(2), 0.0, 1.0, 0.1), DimensionError);
}

TEST_CASE("trajectory CSV keeps full precision") {
    const auto &m = find_model("lorenz");
    const auto traj = integrate(m, m.true_params, m.default_initial_state, 0.0, 1.0, 0.01);
    const std::string csv = io::trajectory_csv(traj);
    CHECK(csv.rfind("t,x1,x2,x3\n", 0) == 0);
    const auto back = io::parse_trajectory_csv(csv, "lorenz");
    CHECK(back.times == traj.times);
    CHECK(back.states == traj.states);
    CHECK_THROWS(io::parse_trajectory_csv("t,y1\n0,1\n"));
    CHECK_THROWS(io::parse_trajectory_csv("t,x1\n0,abc\n"));
}
