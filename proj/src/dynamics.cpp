#include "paramest/dynamics.hpp"

#include "paramest/errors.hpp"

#include <algorithm>

namespace paramest {
namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    std::copy(values.begin(), values.end(), v.data());
    return v;
}

// dx/dt = a x + b y, dy/dt = c x + d y
void linear_oscillator_rhs(std::span<const double> s, double, std::span<const double> p,
                           std::span<double> out) {
    out[0] = p[0] * s[0] + p[1] * s[1];
    out[1] = p[2] * s[0] + p[3] * s[1];
}

// dx/dt = a x^3 + b y^3, dy/dt = c x^3 + d y^3
void cubic_oscillator_rhs(std::span<const double> s, double, std::span<const double> p,
                          std::span<double> out) {
    const double x3 = s[0] * s[0] * s[0];
    const double y3 = s[1] * s[1] * s[1];
    out[0] = p[0] * x3 + p[1] * y3;
    out[1] = p[2] * x3 + p[3] * y3;
}

void linear_3d_rhs(std::span<const double> s, double, std::span<const double> p,
                   std::span<double> out) {
    out[0] = p[0] * s[0] + p[1] * s[1];
    out[1] = p[2] * s[0] + p[3] * s[1];
    out[2] = p[4] * s[2];
}

void van_der_pol_rhs(std::span<const double> s, double, std::span<const double> p,
                     std::span<double> out) {
    out[0] = s[1];
    out[1] = p[0] * (1.0 - s[0] * s[0]) * s[1] - s[0];
}

void lorenz_rhs(std::span<const double> s, double, std::span<const double> p,
                std::span<double> out) {
    const double sigma = p[0], rho = p[1], beta = p[2];
    out[0] = sigma * (s[1] - s[0]);
    out[1] = s[0] * (rho - s[2]) - s[1];
    out[2] = s[0] * s[1] - beta * s[2];
}

std::vector<ModelSpec> build_registry() {
    const TimeSpan span{0.0, 25.0};
    std::vector<ModelSpec> models;

    models.push_back({"linear_oscillator_2d", 2, 4, linear_oscillator_rhs, {"a", "b", "c", "d"},
                      vec({-0.1, 2.0, -2.0, -0.1}), vec({2.0, 0.0}), span, 0.01});
    models.push_back({"cubic_oscillator_2d", 2, 4, cubic_oscillator_rhs, {"a", "b", "c", "d"},
                      vec({-0.1, 2.0, -2.0, -0.1}), vec({2.0, 0.0}), span, 0.01});
    models.push_back({"linear_3d", 3, 5, linear_3d_rhs, {"p1", "p2", "p3", "p4", "p5"},
                      vec({-0.1, -2.0, 2.0, -0.1, -0.3}), vec({0.0, 2.0, 1.0}), span, 0.01});
    models.push_back({"van_der_pol", 2, 1, van_der_pol_rhs, {"mu"}, vec({1.5}), vec({1.0, 0.0}),
                      span, 0.01});
    models.push_back({"lorenz", 3, 3, lorenz_rhs, {"sigma", "rho", "beta"},
                      vec({10.0, 28.0, 8.0 / 3.0}), vec({-8.0, 7.0, 27.0}), span, 0.01});
    return models;
}

} // namespace

const std::vector<ModelSpec> &registry() {
    static const std::vector<ModelSpec> models = build_registry();
    return models;
}

const ModelSpec &find_model(const std::string &name) {
    const auto &models = registry();
    auto it = std::find_if(models.begin(), models.end(),
                           [&](const ModelSpec &m) { return m.name == name; });
    if (it == models.end()) {
        throw ModelNotFoundError(name);
    }
    return *it;
}

Eigen::VectorXd eval_rhs(const ModelSpec &model, const Eigen::VectorXd &state, double time,
                         const Eigen::VectorXd &params) {
    if (static_cast<std::size_t>(state.size()) != model.state_dim) {
        throw DimensionError(model.name + ": state has length " + std::to_string(state.size()) +
                             ", expected " + std::to_string(model.state_dim));
    }
    if (static_cast<std::size_t>(params.size()) != model.param_dim) {
        throw DimensionError(model.name + ": params has length " + std::to_string(params.size()) +
                             ", expected " + std::to_string(model.param_dim));
    }
    Eigen::VectorXd out(state.size());
    model.rhs({state.data(), model.state_dim}, time, {params.data(), model.param_dim},
              {out.data(), model.state_dim});
    return out;
}

} // namespace paramest
