#include "paramest/trust_region.hpp"

#include "paramest/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace paramest {

void TrustRegionConfig::validate() const {
    if (!(initial_radius > 0.0) || !(max_radius > 0.0) || !(tolerance > 0.0)) {
        throw std::invalid_argument("trust region radii and tolerance must be positive");
    }
    if (initial_radius > max_radius) {
        throw std::invalid_argument("initial_radius must not exceed max_radius");
    }
    if (!(0.0 < shrink_threshold && shrink_threshold < expand_threshold && expand_threshold < 1.0)) {
        throw std::invalid_argument("need 0 < shrink_threshold < expand_threshold < 1");
    }
    if (!(acceptance_threshold < shrink_threshold) ||
        (acceptance_threshold < 0.0 && acceptance_threshold != -std::numeric_limits<double>::infinity())) {
        throw std::invalid_argument("acceptance_threshold must be -inf or in [0, shrink_threshold)");
    }
    if (!(shrink_factor > 0.0 && shrink_factor < 1.0) || !(expand_factor > 1.0)) {
        throw std::invalid_argument("need 0 < shrink_factor < 1 < expand_factor");
    }
    if (max_iterations < 1) {
        throw std::invalid_argument("max_iterations must be positive");
    }
}

std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::radius_below_tolerance: return "radius_below_tolerance";
    case Termination::max_iterations: return "max_iterations";
    case Termination::objective_stagnation: return "objective_stagnation";
    }
    return "unknown";
}

Termination parse_termination(std::string_view text) {
    if (text == "radius_below_tolerance") return Termination::radius_below_tolerance;
    if (text == "max_iterations") return Termination::max_iterations;
    if (text == "objective_stagnation") return Termination::objective_stagnation;
    throw std::invalid_argument("unknown termination '" + std::string(text) + "'");
}

double model_reduction(const Eigen::VectorXd &gradient, const Eigen::MatrixXd &hessian,
                       const Eigen::VectorXd &step) {
    return -(gradient.dot(step) + 0.5 * step.dot(hessian * step));
}

namespace {

// Solves H s = -g, adding lambda = 1e-10 trace(H)/p to the diagonal when H is singular.
// Returns false when no usable Newton direction exists (H numerically zero).
bool newton_step(const Eigen::VectorXd &g, const Eigen::MatrixXd &H, Eigen::VectorXd &s) {
    const Eigen::Index p = g.size();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, Eigen::EigenvaluesOnly);
    const double max_ev = eig.eigenvalues().cwiseAbs().maxCoeff();
    const double min_ev = eig.eigenvalues().minCoeff();
    if (max_ev == 0.0) {
        return false;
    }
    Eigen::MatrixXd A = H;
    if (min_ev <= 1e-12 * max_ev) {
        const double lambda = 1e-10 * H.trace() / static_cast<double>(p);
        if (!(lambda > 0.0)) {
            return false;
        }
        A.diagonal().array() += lambda;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) {
        return false;
    }
    s = llt.solve(-g);
    return s.allFinite();
}

} // namespace

SubproblemSolution solve_subproblem(const Eigen::VectorXd &gradient,
                                    const Eigen::MatrixXd &hessian, double radius) {
    const Eigen::Index p = gradient.size();
    if (hessian.rows() != p || hessian.cols() != p) {
        throw DimensionError("hessian must be p x p with p = gradient length");
    }
    if (!gradient.allFinite() || !hessian.allFinite()) {
        throw InvalidModelError("non-finite gradient or hessian");
    }
    if (!(radius > 0.0)) {
        throw std::invalid_argument("trust region radius must be positive");
    }

    const double gnorm = gradient.norm();
    if (gnorm == 0.0) {
        return {Eigen::VectorXd::Zero(p), 0.0};
    }
    const auto finish = [&](Eigen::VectorXd s) {
        const double pred = model_reduction(gradient, hessian, s);
        return SubproblemSolution{std::move(s), pred};
    };
    const Eigen::VectorXd boundary_descent = -(radius / gnorm) * gradient;

    Eigen::VectorXd full;
    const bool have_newton = newton_step(gradient, hessian, full);
    if (have_newton && full.norm() <= radius) {
        return finish(full);
    }

    const double curvature = gradient.dot(hessian * gradient);
    if (curvature <= 0.0) {
        return finish(boundary_descent);
    }
    const Eigen::VectorXd cauchy = -(gnorm * gnorm / curvature) * gradient;
    const double cauchy_norm = cauchy.norm();
    if (cauchy_norm >= radius || !have_newton) {
        return finish(cauchy_norm >= radius ? boundary_descent : cauchy);
    }

    // Second leg: |cauchy + tau (full - cauchy)| = radius, tau in [0, 1].
    const Eigen::VectorXd d = full - cauchy;
    const double a = d.squaredNorm();
    const double b = 2.0 * cauchy.dot(d);
    const double c = cauchy_norm * cauchy_norm - radius * radius;
    const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
    // c < 0 so the positive root is well-conditioned in this form.
    const double tau = std::clamp((-2.0 * c) / (b + disc), 0.0, 1.0);
    Eigen::VectorXd s = cauchy + tau * d;
    const double norm = s.norm();
    if (norm > radius) {
        s *= radius / norm;
    }
    return finish(std::move(s));
}

SolveReport minimize(const Objective &objective, const Eigen::VectorXd &start,
                     const TrustRegionConfig &config) {
    config.validate();

    ObjectiveEval current;
    try {
        current = objective(start);
    } catch (const std::exception &e) {
        throw ObjectiveError(std::string("objective failed at the starting point: ") + e.what());
    }
    if (!std::isfinite(current.value)) {
        throw ObjectiveError("objective is not finite at the starting point");
    }

    SolveReport report;
    Eigen::VectorXd theta = start;
    double radius = config.initial_radius;
    int iteration = 0;
    int stagnant = 0;

    TrustRegionState initial;
    initial.iterate = theta;
    initial.radius = radius;
    initial.objective_value = current.value;
    report.trace.push_back(initial);

    Termination termination = Termination::max_iterations;
    for (;;) {
        if (radius <= config.tolerance) {
            termination = Termination::radius_below_tolerance;
            break;
        }
        if (iteration >= config.max_iterations) {
            termination = Termination::max_iterations;
            break;
        }

        const SubproblemSolution sub =
            solve_subproblem(current.gradient, current.gauss_newton_hessian, radius);
        const double step_norm = sub.step.norm();

        TrustRegionState entry;
        entry.step_norm = step_norm;
        entry.predicted_reduction = sub.predicted_reduction;

        double rho = -std::numeric_limits<double>::infinity();
        ObjectiveEval trial;
        bool trial_ok = false;
        if (sub.predicted_reduction > 0.0) {
            try {
                trial = objective(theta + sub.step);
                trial_ok = std::isfinite(trial.value);
            } catch (const std::exception &) {
                trial_ok = false;
            }
            if (trial_ok) {
                entry.trial_objective = trial.value;
                rho = (current.value - trial.value) / sub.predicted_reduction;
            }
        }

        if (rho < config.shrink_threshold) {
            radius = config.shrink_factor * radius;
        } else if (rho > config.expand_threshold &&
                   std::abs(step_norm - radius) <= 1e-9 * radius) {
            radius = std::min(config.expand_factor * radius, config.max_radius);
        }

        const bool accept = trial_ok && rho > config.acceptance_threshold;
        bool stagnated = false;
        if (accept) {
            const double decrease = current.value - trial.value;
            const double scale = std::abs(current.value);
            const bool tiny = scale == 0.0 ? true : decrease / scale < 1e-14;
            stagnant = tiny ? stagnant + 1 : 0;
            stagnated = stagnant >= 5;
            theta += sub.step;
            current = std::move(trial);
        }

        ++iteration;
        entry.iterate = theta;
        entry.radius = radius;
        entry.last_ratio = rho;
        entry.objective_value = current.value;
        entry.iteration = iteration;
        entry.accepted = accept;
        report.trace.push_back(std::move(entry));

        if (stagnated) {
            termination = Termination::objective_stagnation;
            break;
        }
    }

    report.final_params = theta;
    report.final_objective = current.value;
    report.iterations = iteration;
    report.termination = termination;
    return report;
}

} // namespace paramest
