#pragma once

#include "paramest/dynamics.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <string>

namespace paramest {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// States sampled on a uniform time grid; row j of `states` is x(times[j]).
struct Trajectory {
    std::string model_name;
    Eigen::VectorXd times;
    RowMatrix states;

    std::size_t size() const { return static_cast<std::size_t>(times.size()); }
    std::size_t dim() const { return static_cast<std::size_t>(states.cols()); }
};

/// Any state component beyond this magnitude counts as divergence.
inline constexpr double kDivergenceBound = 1e8;

/// Number of nodes on the grid t0 + j*step that fit in [t0, t1].
std::size_t grid_size(double t0, double t1, double step);

/// Classic RK4 on the grid t_j = t0 + j*step, j = 0..grid_size-1.
/// Throws DivergenceError carrying the first grid index with a bad state.
Trajectory integrate(const ModelSpec &model, const Eigen::VectorXd &params,
                     const Eigen::VectorXd &initial_state, double t0, double t1, double step);

} // namespace paramest
