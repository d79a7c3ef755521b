#pragma once

// Verification engine for scaling identities of characteristic exponents:
// dilative stability, its (f,g) generalization, aggregate similarity,
// parameter conversions between the two, and exponent/moment estimators.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dilastab/charexp.hpp"

namespace dilastab {

using ExponentOracle = std::function<double(const ExponentQuery&)>;

/// One factor of an (f,g) scaling pair: either a pure power of T or an
/// arbitrary positive function with a display label.
class LawFunction {
public:
    static LawFunction power(double exponent);
    static LawFunction custom(std::function<double(double)> fn,
                              std::string label);

    double operator()(double T) const;
    bool is_power() const { return is_power_; }
    double exponent() const { return exponent_; }
    const std::string& label() const { return label_; }

private:
    LawFunction() = default;
    bool is_power_ = true;
    double exponent_ = 0.0;
    std::function<double(double)> fn_;
    std::string label_;
};

struct GeneralizedScalingLaw {
    LawFunction space;  // multiplies theta
    LawFunction weight; // multiplies the exponent
};

struct AggregateSimilarityLaw {
    double rho1 = 0.0;
    double rho2 = 0.0;
};

struct VerificationPoint {
    double scale = 0.0;  // T, or m for aggregate similarity
    std::vector<double> times;
    std::vector<double> thetas;
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_err = 0.0;
    bool determinate = true;
    std::string error;
};

struct VerificationReport {
    std::string law;
    std::string grid;
    std::vector<VerificationPoint> points;
    double max_rel_err = 0.0;
    double tol = 0.0;
    bool pass = false;
};

struct VerificationGrids {
    std::vector<std::vector<double>> times_grid{{1.0}, {1.0, 2.0}};
    std::vector<double> theta_grid{0.25, 0.5, 1.0, 2.0};
    std::vector<double> T_grid{0.5, 1.0, 2.0, 5.0};
};

/// Checks psi_{T t}(theta) = T^delta psi_t(T^{alpha-delta/2} theta) on the
/// product grid; each scalar theta is broadcast across the time tuple.
/// Relative errors are guarded by max(|lhs|,|rhs|,1e-12).  Oracle
/// failures mark the point indeterminate and fail the report.
VerificationReport verify_dilative_stability(
    const ExponentOracle& oracle, const ScalingLaw& law,
    const std::vector<std::vector<double>>& times_grid,
    const std::vector<double>& theta_grid, const std::vector<double>& T_grid,
    double tol);

/// Same with weight(T), space(T) in place of T^delta, T^{alpha-delta/2}.
VerificationReport verify_fg_dilative(
    const ExponentOracle& oracle, const GeneralizedScalingLaw& law,
    const std::vector<std::vector<double>>& times_grid,
    const std::vector<double>& theta_grid, const std::vector<double>& T_grid,
    double tol);

/// Exponent-level aggregate similarity:
/// m psi_t(theta) = psi_{m^{-rho2} t}(m^{rho1} theta) for each m.
VerificationReport verify_aggregate_similarity(
    const ExponentOracle& oracle, const AggregateSimilarityLaw& law,
    const std::vector<int>& m_list,
    const std::vector<std::vector<double>>& times_grid,
    const std::vector<double>& theta_grid, double tol);

/// (alpha,delta) -> (1/2 - alpha/delta, -1/delta); rejects delta == 0
/// (the purely self-similar case has no aggregate-similarity image).
AggregateSimilarityLaw ds_to_as(const ScalingLaw& law);

/// (rho1,rho2) -> (rho1/rho2 - 1/(2 rho2), -1/rho2); rejects rho2 == 0.
/// The underlying equivalence additionally assumes weak right-continuity
/// of the finite-dimensional laws, which a numerical check cannot see;
/// only the grid identity is ever verified here.
ScalingLaw as_to_ds(const AggregateSimilarityLaw& law);

/// Membership test for the line delta + (alpha - delta/2)/H = 1 of valid
/// laws of a symmetric (1/H)-stable driver, within 1e-12.
std::function<bool(const ScalingLaw&)> stable_family_laws(double H);

/// Checks Var(X_{Tt}) = T^{2 alpha} Var(X_t) and, where the means are not
/// negligible, E(X_{Tt}) = T^{alpha+delta/2} E(X_t).  mean_fn may be
/// empty for centered processes.
VerificationReport moment_scaling_check(
    const std::function<double(double)>& mean_fn,
    const std::function<double(double)>& var_fn, const ScalingLaw& law,
    const std::vector<double>& t_grid, const std::vector<double>& T_grid,
    double tol);

struct VarianceSample {
    double T = 0.0;
    double variance = 0.0;
    double stderr_variance = 0.0;
};

struct AlphaEstimate {
    double alpha_hat = 0.0;
    double stderr = 0.0;
};

/// Weighted least-squares slope of log variance against log T, halved.
/// Requires at least two distinct T with positive variances.
AlphaEstimate estimate_alpha_from_variance(
    const std::vector<VarianceSample>& samples);

struct LawSearchConfig {
    double delta_min = -3.0;
    double delta_max = 3.0;
    std::vector<double> probe_T{2.0, 4.0};
    double theta_a = 0.5;
    double theta_b = 1.0;
    std::vector<double> residual_T{0.5, 2.0, 4.0};
    std::vector<double> residual_thetas{0.5, 1.0, 2.0};
    int coarse_points = 25;
    int golden_iters = 48;
    double flat_step = 0.05;
};

struct LawEstimate {
    ScalingLaw law;
    double residual = 0.0;
    bool flat_direction_found = false;
    double flat_dalpha = 0.0;  // unit direction of near-zero residual
    double flat_ddelta = 0.0;  // growth, when such a direction exists
};

class SearchError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fits (alpha, delta) to the single-time scaling identity: outer
/// golden-section over delta, inner solve for the space exponent from
/// two theta probes (log-log power interpolation refined by secant).
/// Oracles with a line of valid laws are reported with the detected flat
/// direction instead of a privileged parameterization.
LawEstimate estimate_law_from_exponent(const ExponentOracle& oracle,
                                       const LawSearchConfig& cfg = {});

}  // namespace dilastab
