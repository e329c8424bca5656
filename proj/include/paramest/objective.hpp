#pragma once

#include "paramest/dynamics.hpp"
#include "paramest/integrator.hpp"
#include "paramest/noise.hpp"

#include <Eigen/Core>

namespace paramest {

/// Binds the weighted least-squares cost J(theta) to a model and its data.
/// The measurement times must be the integrator grid for
/// (times[0], times[k-1], integration_step).
struct ObjectiveContext {
    ModelSpec model;
    MeasurementSet measurements;
    Eigen::VectorXd initial_state;
    double integration_step = 0.01;

    /// Throws DimensionError / GridMismatchError when the invariants above fail.
    void validate() const;
};

struct ObjectiveEval {
    double value = 0.0;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd jacobian; ///< d residuals / d params, (k*n) x p
    Eigen::VectorXd gradient;
    Eigen::MatrixXd gauss_newton_hessian;
};

/// Flattened residuals (eta_ij - x_i(t_j; theta)) / sigma_ij, row-major by time then component.
/// Throws ObjectiveError if the integration diverges.
Eigen::VectorXd residuals(const ObjectiveContext &ctx, const Eigen::VectorXd &params);

/// J(theta) alone: one integration.
double objective_value(const ObjectiveContext &ctx, const Eigen::VectorXd &params);

/// Value, residuals, forward-difference Jacobian with h_i = max(1e-6, 1e-6 |theta_i|),
/// gradient 2 J^T r and Gauss-Newton Hessian 2 J^T J.
ObjectiveEval evaluate(const ObjectiveContext &ctx, const Eigen::VectorXd &params);

/// Trajectory implied by `params` on the measurement grid.
Trajectory fitted_trajectory(const ObjectiveContext &ctx, const Eigen::VectorXd &params);

/// sqrt(sum (y - yhat)^2 / N) over all k*n entries.
double rmse(const Trajectory &predicted, const Trajectory &truth);
double rmse(const Trajectory &predicted, const MeasurementSet &observed);

} // namespace paramest
