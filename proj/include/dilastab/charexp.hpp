#pragma once

// Deterministic characteristic-exponent oracles: quadrature of the
// moving-average exponent integral, the stable-integral exponent, the
// nested aggregated-AR(1) exponent, and the Wiener closed form.

#include <vector>

#include "dilastab/kernels.hpp"
#include "dilastab/levy_models.hpp"
#include "dilastab/quadrature.hpp"

namespace dilastab {

struct ExponentQuery {
    std::vector<double> times;
    std::vector<double> thetas;

    void validate() const;  // equal nonempty lengths
};

struct ExponentValue {
    double value = 0.0;
    double err_estimate = 0.0;  // panel error + certified truncation mass
};

/// psi_{t_1..t_k}(theta_1..theta_k) = integral of
/// phi(sum_j theta_j f(t_j,u)) du for the given driver and kernel.  The
/// truncation radius is chosen from the kernel tail envelope and the
/// bound phi(x) <= m2 x^2 / 2 so the reported error covers the cut tail.
ExponentValue gflp_exponent(const LevyModel& model, const Kernel& kernel,
                            const ExponentQuery& q,
                            const QuadratureConfig& cfg);

/// m2 * integral of f(s,u) f(t,u) du.
ExponentValue gflp_covariance(const LevyModel& model, const Kernel& kernel,
                              double s, double t, const QuadratureConfig& cfg);

/// integral of |sigma sum_j theta_j f(t_j,u)|^alpha du for a symmetric
/// stable driver.  Throws DivergenceError when the envelope shows the
/// tail is not integrable.
ExponentValue stable_exponent(const Kernel& kernel, double stable_index,
                              double sigma, const ExponentQuery& q,
                              const QuadratureConfig& cfg);

/// Exponent of the aggregated-AR(1) limit process:
///   -C * int_0^inf (exp{-I(x)/2} - 1) x^beta dx,
///   I(x) = int_R (sum_j theta_j (f(x,t_j-s) - f(x,-s)))^2 ds.
/// The s < 0 part of I(x) is the exact exponential tail A(x)^2/(2x) with
/// A(x) = sum_j theta_j (1-e^{-x t_j})/x; only s in [0, max t_j] needs
/// quadrature.  The outer integral runs in x = e^y coordinates so both
/// improper endpoints decay geometrically.  beta in (-1,1), times >= 0.
ExponentValue zbeta_exponent(double beta, double C, const ExponentQuery& q,
                             const QuadratureConfig& cfg);

/// Standard Wiener exponent: 0.5 * sum_{j,l} min(t_j,t_l) theta_j theta_l.
double wiener_exponent(const ExponentQuery& q);

/// Exact multi-time exponent of a symmetric stable Levy process with
/// Hurst index hurst >= 1/2 (stability index 1/hurst):
/// sum_j (t_j - t_{j-1}) |sigma (theta_j + ... + theta_k)|^{1/hurst},
/// times strictly ascending and positive.  Every law on the line
/// delta + (alpha - delta/2)/hurst = 1 holds for it.
double stable_levy_exponent(double hurst, double sigma,
                            const ExponentQuery& q);

}  // namespace dilastab
