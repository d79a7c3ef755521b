#pragma once

// Adaptive Gauss-Kronrod panel quadrature with breakpoint hints and
// power-law tail truncation helpers.

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dilastab {

struct QuadratureConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    std::size_t max_subdivisions = 10000;
    double truncation_safety = 10.0;  // multiplier on analytic tail radii

    void validate() const;
};

struct IntegralEstimate {
    double value = 0.0;
    double err_estimate = 0.0;
    std::size_t subdivisions = 0;
};

/// Subdivision budget exhausted; carries the best estimate so far.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, double best_value,
                        double err_bound, std::string layer = {})
        : std::runtime_error(what),
          best_value(best_value),
          err_bound(err_bound),
          layer(std::move(layer)) {}

    double best_value;
    double err_bound;
    std::string layer;
};

/// Tail-integrability check failed (integrand does not decay fast enough).
class DivergenceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Integrates fn over [lo, hi] by adaptive bisection of Gauss-Kronrod 7-15
/// panels.  Interior breakpoints become initial panel edges, and long
/// outer segments are pre-split geometrically so power-law tails do not
/// burn the subdivision budget.  On success the returned err_estimate is
/// <= max(abs_tol, rel_tol*|value|); on budget exhaustion throws
/// NonConvergenceError with the best estimate.
IntegralEstimate integrate_adaptive(const std::function<double(double)>& fn,
                                    double lo, double hi,
                                    std::span<const double> breakpoints,
                                    const QuadratureConfig& cfg);

/// Mass of an envelope integrand coeff*|u|^power beyond |u| > radius
/// (one or both sides).  Requires power < -1.
double power_tail_mass(double coeff, double power, double radius,
                       bool two_sided);

/// Smallest radius R with power_tail_mass(coeff, power, R, two_sided)
/// <= target.  Requires power < -1 and target > 0; throws DivergenceError
/// otherwise.
double power_tail_radius(double coeff, double power, double target,
                         bool two_sided);

}  // namespace dilastab
