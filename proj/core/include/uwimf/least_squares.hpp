#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace uwimf::lsq {

/// Scalar curve y = f(x; params). Writes d f / d params into `gradient`.
using CurveModel =
    std::function<double(double x, std::span<const double> params, std::span<double> gradient)>;

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct Options {
    int max_iterations = 200;
    double step_tolerance = 1e-8;
    double initial_damping = 1e-3;
};

struct Result {
    std::vector<double> params;
    double cost = 0.0;  ///< sum of squared residuals
    int iterations = 0;
    bool converged = false;
    /// Cost after the initial point and after every accepted step.
    std::vector<double> accepted_costs;
};

/// Box-constrained Levenberg-Marquardt on sum_i (f(x_i; p) - y_i)^2.
///
/// Trial steps are projected onto the box; a step is accepted only if it lowers
/// the cost, so `accepted_costs` is strictly decreasing. Stops when the projected
/// step norm drops below `step_tolerance` or after `max_iterations`.
Result levenberg_marquardt(std::span<const double> xs, std::span<const double> ys,
                           const CurveModel& model, std::vector<double> initial,
                           const Bounds& bounds, const Options& options = {});

/// Runs levenberg_marquardt from `starts` points drawn uniformly inside the box
/// (seeded) and returns the lowest-cost finite result. Non-finite runs are
/// discarded; if every run is non-finite the returned result has an empty
/// parameter vector.
Result multi_start_fit(std::span<const double> xs, std::span<const double> ys,
                       const CurveModel& model, const Bounds& bounds, int starts,
                       std::uint64_t seed, const Options& options = {});

}  // namespace uwimf::lsq
