#include "paramest/integrator.hpp"

#include "paramest/errors.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace paramest {

std::size_t grid_size(double t0, double t1, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw std::invalid_argument("integration step must be positive and finite");
    }
    if (!(t1 >= t0)) {
        throw std::invalid_argument("time span must satisfy t1 >= t0");
    }
    // 1e-9 absorbs the rounding in (t1 - t0) / step for spans that are exact multiples
    return static_cast<std::size_t>(std::floor((t1 - t0) / step + 1e-9)) + 1;
}

Trajectory integrate(const ModelSpec &model, const Eigen::VectorXd &params,
                     const Eigen::VectorXd &initial_state, double t0, double t1, double step) {
    const std::size_t n = model.state_dim;
    if (static_cast<std::size_t>(params.size()) != model.param_dim) {
        throw DimensionError(model.name + ": expected " + std::to_string(model.param_dim) +
                             " parameters, got " + std::to_string(params.size()));
    }
    if (static_cast<std::size_t>(initial_state.size()) != n) {
        throw DimensionError(model.name + ": expected initial state of length " +
                             std::to_string(n) + ", got " + std::to_string(initial_state.size()));
    }
    if (!(t1 > t0)) {
        throw std::invalid_argument("time span must satisfy t1 > t0");
    }
    const std::size_t k = grid_size(t0, t1, step);
    if (k < 2) {
        throw std::invalid_argument("time span shorter than one integration step");
    }

    Trajectory traj;
    traj.model_name = model.name;
    traj.times.resize(static_cast<Eigen::Index>(k));
    traj.states.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));

    const std::span<const double> p{params.data(), model.param_dim};
    std::vector<double> x(initial_state.data(), initial_state.data() + n);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

    auto check = [&](std::size_t j, double t) {
        for (double v : x) {
            if (!std::isfinite(v) || std::abs(v) > kDivergenceBound) {
                throw DivergenceError(j, t);
            }
        }
    };

    traj.times[0] = t0;
    check(0, t0);
    traj.states.row(0) = initial_state.transpose();

    for (std::size_t j = 1; j < k; ++j) {
        const double t = t0 + static_cast<double>(j - 1) * step;
        const double half = 0.5 * step;

        model.rhs(x, t, p, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + half * k1[i];
        model.rhs(tmp, t + half, p, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + half * k2[i];
        model.rhs(tmp, t + half, p, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + step * k3[i];
        model.rhs(tmp, t + step, p, k4);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }

        const double tj = t0 + static_cast<double>(j) * step;
        check(j, tj);
        traj.times[static_cast<Eigen::Index>(j)] = tj;
        for (std::size_t i = 0; i < n; ++i) {
            traj.states(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = x[i];
        }
    }
    return traj;
}

} // namespace paramest
