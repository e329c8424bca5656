#include "paramest/objective.hpp"

#include "paramest/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace paramest {
namespace {

bool same_time(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a));
}

void check_grids(const Eigen::VectorXd &a, const Eigen::VectorXd &b, Eigen::Index cols_a,
                 Eigen::Index cols_b) {
    if (a.size() != b.size() || cols_a != cols_b) {
        throw GridMismatchError("grid shapes differ: " + std::to_string(a.size()) + "x" +
                                std::to_string(cols_a) + " vs " + std::to_string(b.size()) + "x" +
                                std::to_string(cols_b));
    }
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        if (!same_time(a[j], b[j])) {
            throw GridMismatchError("time grids differ at index " + std::to_string(j));
        }
    }
}

double rms(const RowMatrix &a, const RowMatrix &b) {
    const double n = static_cast<double>(a.size());
    if (n == 0.0) {
        return 0.0;
    }
    return std::sqrt((a - b).squaredNorm() / n);
}

} // namespace

void ObjectiveContext::validate() const {
    const auto &m = measurements;
    if (m.dim() != model.state_dim) {
        throw DimensionError("measurement dimension " + std::to_string(m.dim()) +
                             " does not match model state dimension " +
                             std::to_string(model.state_dim));
    }
    if (m.weights.rows() != m.observations.rows() || m.weights.cols() != m.observations.cols() ||
        m.observations.rows() != m.times.size()) {
        throw DimensionError("measurement arrays have inconsistent shapes");
    }
    if ((m.weights.array() <= 0.0).any()) {
        throw std::invalid_argument("measurement weights must be strictly positive");
    }
    if (static_cast<std::size_t>(initial_state.size()) != model.state_dim) {
        throw DimensionError("initial state has wrong length");
    }
    if (m.size() < 2) {
        throw GridMismatchError("measurement set needs at least two time points");
    }
    const double t0 = m.times[0];
    const double t1 = m.times[m.times.size() - 1];
    if (grid_size(t0, t1, integration_step) != m.size()) {
        throw GridMismatchError("measurement times are not the integration grid");
    }
    for (Eigen::Index j = 0; j < m.times.size(); ++j) {
        if (!same_time(m.times[j], t0 + static_cast<double>(j) * integration_step)) {
            throw GridMismatchError("measurement time " + std::to_string(j) +
                                    " is off the integration grid");
        }
    }
}

Trajectory fitted_trajectory(const ObjectiveContext &ctx, const Eigen::VectorXd &params) {
    const auto &t = ctx.measurements.times;
    return integrate(ctx.model, params, ctx.initial_state, t[0], t[t.size() - 1],
                     ctx.integration_step);
}

Eigen::VectorXd residuals(const ObjectiveContext &ctx, const Eigen::VectorXd &params) {
    Trajectory traj;
    try {
        traj = fitted_trajectory(ctx, params);
    } catch (const DivergenceError &e) {
        throw ObjectiveError(std::string("objective evaluation failed: ") + e.what());
    }
    const auto &m = ctx.measurements;
    RowMatrix r = (m.observations - traj.states).cwiseQuotient(m.weights);
    return Eigen::Map<const Eigen::VectorXd>(r.data(), r.size());
}

double objective_value(const ObjectiveContext &ctx, const Eigen::VectorXd &params) {
    return residuals(ctx, params).squaredNorm();
}

ObjectiveEval evaluate(const ObjectiveContext &ctx, const Eigen::VectorXd &params) {
    ctx.validate();
    if (static_cast<std::size_t>(params.size()) != ctx.model.param_dim) {
        throw DimensionError("expected " + std::to_string(ctx.model.param_dim) +
                             " parameters, got " + std::to_string(params.size()));
    }
    ObjectiveEval out;
    out.residuals = residuals(ctx, params);
    out.value = out.residuals.squaredNorm();

    const Eigen::Index p = params.size();
    out.jacobian.resize(out.residuals.size(), p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double h = std::max(1e-6, 1e-6 * std::abs(params[i]));
        Eigen::VectorXd shifted = params;
        shifted[i] += h;
        out.jacobian.col(i) = (residuals(ctx, shifted) - out.residuals) / h;
    }
    out.gradient = 2.0 * out.jacobian.transpose() * out.residuals;
    out.gauss_newton_hessian = 2.0 * out.jacobian.transpose() * out.jacobian;
    return out;
}

double rmse(const Trajectory &predicted, const Trajectory &truth) {
    check_grids(predicted.times, truth.times, predicted.states.cols(), truth.states.cols());
    return rms(predicted.states, truth.states);
}

double rmse(const Trajectory &predicted, const MeasurementSet &observed) {
    check_grids(predicted.times, observed.times, predicted.states.cols(),
                observed.observations.cols());
    return rms(predicted.states, observed.observations);
}

} // namespace paramest
