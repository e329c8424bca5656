#pragma once

#include <Eigen/Core>

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace paramest {

/// Right-hand side F(x, t, theta) writing its result into `out` (length n).
using RhsFunction = std::function<void(std::span<const double> state, double time,
                                       std::span<const double> params, std::span<double> out)>;

struct TimeSpan {
    double t0 = 0.0;
    double t1 = 0.0;
};

/// A named autonomous benchmark system together with the values used to simulate it.
struct ModelSpec {
    std::string name;
    std::size_t state_dim = 0;
    std::size_t param_dim = 0;
    RhsFunction rhs;
    std::vector<std::string> param_names;
    Eigen::VectorXd true_params;
    Eigen::VectorXd default_initial_state;
    TimeSpan default_time_span;
    double default_step = 0.01;
};

/// All built-in models, in a fixed order.
const std::vector<ModelSpec> &registry();

/// Throws ModelNotFoundError for names not in the registry.
const ModelSpec &find_model(const std::string &name);

/// Evaluates the model right-hand side with dimension checks.
Eigen::VectorXd eval_rhs(const ModelSpec &model, const Eigen::VectorXd &state, double time,
                         const Eigen::VectorXd &params);

} // namespace paramest
