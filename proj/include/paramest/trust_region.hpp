#pragma once

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <string_view>
#include <vector>

#include "paramest/objective.hpp"

namespace paramest {

/// Radius update constants follow the classic 0.25 / 0.75 / x0.25 / x2 scheme.
struct TrustRegionConfig {
    double initial_radius = 0.1;
    double max_radius = 10.0; ///< 100 * initial_radius unless overridden
    double tolerance = 1e-6;  ///< stop once the radius falls to this value
    double shrink_threshold = 0.25;
    double expand_threshold = 0.75;
    double shrink_factor = 0.25;
    double expand_factor = 2.0;
    /// A trial point is accepted iff rho > acceptance_threshold. Set to -infinity to
    /// accept every successfully evaluated trial point.
    double acceptance_threshold = 0.0;
    int max_iterations = 500;

    /// Throws std::invalid_argument if the thresholds or radii are inconsistent.
    void validate() const;
};

/// One row of the solver trace. Entry 0 is the starting point; entry k > 0 records
/// the outcome of iteration k-1 and the iterate/radius it left behind.
struct TrustRegionState {
    Eigen::VectorXd iterate;
    double radius = 0.0;
    double last_ratio = std::numeric_limits<double>::quiet_NaN();
    double objective_value = 0.0;
    int iteration = 0;

    double step_norm = 0.0;
    double predicted_reduction = 0.0;
    double trial_objective = std::numeric_limits<double>::quiet_NaN(); ///< NaN if not evaluated
    bool accepted = false;
};

enum class Termination { radius_below_tolerance, max_iterations, objective_stagnation };

std::string_view to_string(Termination t);
Termination parse_termination(std::string_view text);

struct SolveReport {
    Eigen::VectorXd final_params;
    double final_objective = 0.0;
    int iterations = 0;
    Termination termination = Termination::max_iterations;
    std::vector<TrustRegionState> trace;
};

struct SubproblemSolution {
    Eigen::VectorXd step;
    double predicted_reduction = 0.0;
};

/// Quadratic model reduction m(0) - m(s) = -(g^T s + s^T H s / 2).
double model_reduction(const Eigen::VectorXd &gradient, const Eigen::MatrixXd &hessian,
                       const Eigen::VectorXd &step);

/// Dogleg step for min g^T s + s^T H s / 2 subject to |s| <= radius.
SubproblemSolution solve_subproblem(const Eigen::VectorXd &gradient,
                                    const Eigen::MatrixXd &hessian, double radius);

using Objective = std::function<ObjectiveEval(const Eigen::VectorXd &)>;

/// Trust-region minimization. An objective that throws at the start is rethrown as
/// ObjectiveError; a throw at a trial point rejects the step and shrinks the radius.
SolveReport minimize(const Objective &objective, const Eigen::VectorXd &start,
                     const TrustRegionConfig &config);

} // namespace paramest
