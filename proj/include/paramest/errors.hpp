#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace paramest {

/// Vector or matrix lengths disagree with a model's declared dimensions.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ModelNotFoundError : public std::invalid_argument {
public:
    explicit ModelNotFoundError(const std::string &name)
        : std::invalid_argument("unknown model '" + name + "'") {}
};

/// Two trajectories (or a trajectory and a measurement set) live on different time grids.
class GridMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Integration produced a non-finite state or left the |x| <= 1e8 box.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t time_index, double time)
        : std::runtime_error("integration diverged at grid index " + std::to_string(time_index) +
                             " (t = " + std::to_string(time) + ")"),
          time_index_(time_index), time_(time) {}

    std::size_t time_index() const noexcept { return time_index_; }
    double time() const noexcept { return time_; }

private:
    std::size_t time_index_;
    double time_;
};

/// The objective could not be evaluated at the requested parameters.
class ObjectiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite gradient or Hessian handed to the trust-region subproblem.
class InvalidModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace paramest
