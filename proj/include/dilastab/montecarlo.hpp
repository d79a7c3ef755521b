#pragma once

// Seeded simulation of moving-average processes driven by truncated
// compound-Poisson noise, with empirical characteristic functions and
// statistical validation against the deterministic exponent oracles.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dilastab/charexp.hpp"
#include "dilastab/kernels.hpp"
#include "dilastab/levy_models.hpp"
#include "dilastab/scaling.hpp"

namespace dilastab {

/// Truncation radius would leave more than the allowed variance bias.
class TruncationBiasError : public std::invalid_argument {
public:
    TruncationBiasError(const std::string& what, double bias, double variance)
        : std::invalid_argument(what), bias_bound(bias), variance(variance) {}
    double bias_bound;
    double variance;
};

struct PathEnsemble {
    std::vector<double> times;
    std::size_t n_paths = 0;
    std::vector<double> samples;  // row-major n_paths x times.size()
    std::uint64_t seed = 0;
    double truncation_radius = 0.0;
    int aggregation_m = 1;  // rows are sums of this many independent paths

    // regeneration metadata
    std::string model_family;
    double model_intensity = 0.0;
    double model_jump_param = 0.0;
    std::string kernel_name;
    std::map<std::string, double> kernel_params;

    // per-time truncation-bias bookkeeping (variance tail bounds and the
    // exponent-tail data cf tests need)
    std::vector<double> variance_bias_bound;
    std::vector<double> env_coeff;
    double env_power = 0.0;
    double model_m2 = 0.0;
    bool two_sided = true;

    double at(std::size_t path, std::size_t col) const {
        return samples[path * times.size() + col];
    }
};

/// Simulates n_paths independent paths of S_t = sum_k f(t, tau_k) J_k over
/// the driver's jumps in [-U,U] ([0,U] on a halfline).  Path p draws from
/// substream_seed(seed, p), so results are identical for any n_workers.
/// Rejects U whose certified variance bias exceeds 1% of the analytic
/// variance at any requested time (TruncationBiasError).
PathEnsemble simulate_gflp(const LevyModel& model, const Kernel& kernel,
                           const std::vector<double>& times,
                           std::size_t n_paths, double U, std::uint64_t seed,
                           unsigned n_workers = 1);

/// n_groups rows, each the sum of m independent paths drawn from the same
/// substream pipeline as simulate_gflp (m = 1 reproduces it exactly).
PathEnsemble simulate_aggregate(const LevyModel& model, const Kernel& kernel,
                                int m, const std::vector<double>& times,
                                std::size_t n_groups, double U,
                                std::uint64_t seed, unsigned n_workers = 1);

struct CfEstimate {
    double re = 0.0;
    double im = 0.0;
    double stderr_re = 0.0;
    double stderr_im = 0.0;
    std::size_t n = 0;
};

/// (1/n) sum_p exp{i sum_j theta_j S_{t_j}} with componentwise standard
/// errors; query times must match ensemble columns exactly.
CfEstimate empirical_cf(const PathEnsemble& ensemble, const ExponentQuery& query);

struct CfMatchPoint {
    ExponentQuery query;
    CfEstimate empirical;
    double psi = 0.0;        // oracle exponent
    double cf_expected = 0.0;
    double bias_bound = 0.0; // truncation bias on the CF scale
    double z_re = 0.0;       // bias-adjusted z-scores
    double z_im = 0.0;
    bool pass = true;
};

struct CfMatchReport {
    std::vector<CfMatchPoint> points;
    double max_abs_z = 0.0;
    double z_threshold = 0.0;
    bool pass = false;
    std::string bonferroni_note;
};

/// Compares the empirical CF with exp(-psi) per query; a point passes if
/// |difference| <= z_threshold * stderr + truncation-bias bound on both
/// components.
CfMatchReport cf_match_test(const PathEnsemble& ensemble,
                            const ExponentOracle& oracle,
                            const std::vector<ExponentQuery>& queries,
                            double z_threshold = 4.0);

struct MomentRow {
    double t = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double stderr_mean = 0.0;
    double stderr_variance = 0.0;
};

/// Unbiased per-time sample moments; the variance standard error uses the
/// fourth-moment estimate.
std::vector<MomentRow> ensemble_moments(const PathEnsemble& ensemble);

}  // namespace dilastab
