#include "uwimf/least_squares.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "uwimf/error.hpp"
#include "uwimf/rng.hpp"

namespace uwimf::lsq {
namespace {

double evaluate(std::span<const double> xs, std::span<const double> ys, const CurveModel& model,
                std::span<const double> params, Eigen::VectorXd* residuals, Eigen::MatrixXd* jacobian) {
    const std::size_t m = xs.size();
    const std::size_t n = params.size();
    std::vector<double> grad(n);
    double cost = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = model(xs[i], params, grad) - ys[i];
        cost += r * r;
        if (residuals != nullptr) (*residuals)(static_cast<Eigen::Index>(i)) = r;
        if (jacobian != nullptr) {
            for (std::size_t k = 0; k < n; ++k) {
                (*jacobian)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = grad[k];
            }
        }
    }
    return cost;
}

void project(std::vector<double>& p, const Bounds& bounds) {
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::clamp(p[k], bounds.lower[k], bounds.upper[k]);
}

}  // namespace

Result levenberg_marquardt(std::span<const double> xs, std::span<const double> ys,
                           const CurveModel& model, std::vector<double> initial,
                           const Bounds& bounds, const Options& options) {
    const std::size_t n = initial.size();
    if (xs.size() != ys.size()) throw InvalidInput("least squares: x/y length mismatch");
    if (bounds.lower.size() != n || bounds.upper.size() != n) {
        throw InvalidInput("least squares: bounds do not match parameter count");
    }
    project(initial, bounds);

    const auto m = static_cast<Eigen::Index>(xs.size());
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd r(m);
    Eigen::MatrixXd J(m, nn);

    Result result;
    result.params = std::move(initial);
    result.cost = evaluate(xs, ys, model, result.params, &r, &J);
    result.accepted_costs.push_back(result.cost);

    double damping = options.initial_damping;
    std::vector<double> trial(n);
    bool need_jacobian = false;
    while (result.iterations < options.max_iterations) {
        ++result.iterations;
        if (!std::isfinite(result.cost)) break;
        if (need_jacobian) {
            evaluate(xs, ys, model, result.params, &r, &J);
            need_jacobian = false;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd Jtr = J.transpose() * r;

        Eigen::MatrixXd A = JtJ;
        for (Eigen::Index k = 0; k < nn; ++k) A(k, k) += damping * std::max(JtJ(k, k), 1e-10);
        const Eigen::VectorXd delta = A.ldlt().solve(-Jtr);
        if (!delta.allFinite()) {
            damping *= 10.0;
            if (damping > 1e16) break;
            continue;
        }

        double step_sq = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            trial[k] = result.params[k] + delta(static_cast<Eigen::Index>(k));
        }
        project(trial, bounds);
        for (std::size_t k = 0; k < n; ++k) {
            const double s = trial[k] - result.params[k];
            step_sq += s * s;
        }
        const double step_norm = std::sqrt(step_sq);

        const double trial_cost = evaluate(xs, ys, model, trial, nullptr, nullptr);
        if (std::isfinite(trial_cost) && trial_cost < result.cost) {
            result.params = trial;
            result.cost = trial_cost;
            result.accepted_costs.push_back(trial_cost);
            damping = std::max(damping / 3.0, 1e-15);
            need_jacobian = true;
        } else {
            damping *= 4.0;
        }
        if (step_norm < options.step_tolerance || damping > 1e16) {
            result.converged = true;
            break;
        }
    }
    return result;
}

Result multi_start_fit(std::span<const double> xs, std::span<const double> ys,
                       const CurveModel& model, const Bounds& bounds, int starts,
                       std::uint64_t seed, const Options& options) {
    DeterministicRng rng(seed);
    Result best;
    best.cost = std::numeric_limits<double>::infinity();
    const std::size_t n = bounds.lower.size();
    for (int s = 0; s < starts; ++s) {
        std::vector<double> start(n);
        for (std::size_t k = 0; k < n; ++k) start[k] = rng.uniform(bounds.lower[k], bounds.upper[k]);
        Result r = levenberg_marquardt(xs, ys, model, std::move(start), bounds, options);
        const bool finite = std::isfinite(r.cost) &&
                            std::all_of(r.params.begin(), r.params.end(),
                                        [](double v) { return std::isfinite(v); });
        if (finite && r.cost < best.cost) best = std::move(r);
    }
    return best;
}

}  // namespace uwimf::lsq
