#include "dilastab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dilastab {

namespace {

void fill_paths(const LevyModel& model, const Kernel& kernel,
                const std::vector<double>& times, double lo, double hi,
                std::uint64_t seed, std::size_t first, std::size_t last,
                std::vector<double>& samples) {
    const std::size_t k = times.size();
    for (std::size_t p = first; p < last; ++p) {
        const auto jumps =
            model.sample_jumps(lo, hi, substream_seed(seed, p));
        for (std::size_t j = 0; j < k; ++j) {
            double acc = 0.0;
            for (const Jump& jump : jumps)
                acc += kernel(times[j], jump.position) * jump.size;
            samples[p * k + j] = acc;
        }
    }
}

PathEnsemble simulate_raw(const LevyModel& model, const Kernel& kernel,
                          const std::vector<double>& times,
                          std::size_t n_paths, double U, std::uint64_t seed,
                          unsigned n_workers) {
    if (times.empty())
        throw std::invalid_argument("simulate_gflp: times must be nonempty");
    if (n_paths < 1)
        throw std::invalid_argument("simulate_gflp: n_paths >= 1 required");
    if (!(U > 0.0))
        throw std::invalid_argument("simulate_gflp: U must be positive");

    PathEnsemble e;
    e.times = times;
    e.n_paths = n_paths;
    e.seed = seed;
    e.truncation_radius = U;
    e.model_family = model.family_name();
    e.model_intensity = model.intensity();
    e.model_jump_param = model.jump_param();
    e.kernel_name = kernel.name();
    e.kernel_params = kernel.params();
    e.model_m2 = model.second_moment();
    e.two_sided = kernel.support() == Support::WholeLine;

    // certified variance bias from the kernel tail envelope; rejects U
    // that cannot be certified or that loses more than 1% of variance
    const QuadratureConfig cfg;
    for (double t : times) {
        const TailEnvelope env = kernel.tail_envelope(t);
        e.env_coeff.push_back(env.coeff);
        if (env.coeff != 0.0) e.env_power = env.power;
        if (env.coeff != 0.0 && U < env.min_radius) {
            std::ostringstream os;
            os << "simulate_gflp: U = " << U
               << " is below the certified envelope radius " << env.min_radius
               << " at t = " << t;
            throw TruncationBiasError(os.str(), std::nan(""), std::nan(""));
        }
        const double bias = e.model_m2 * l2_tail_bound(kernel, t, U);
        const double variance = e.model_m2 * l2_norm_sq(kernel, t, cfg);
        if (variance > 0.0 && bias > 0.01 * variance) {
            std::ostringstream os;
            os << "simulate_gflp: truncation bias bound " << bias << " at t = "
               << t << " exceeds 1% of the analytic variance " << variance;
            throw TruncationBiasError(os.str(), bias, variance);
        }
        e.variance_bias_bound.push_back(bias);
    }

    e.samples.assign(n_paths * times.size(), 0.0);
    const double lo = e.two_sided ? -U : 0.0;

    n_workers = std::max(1u, n_workers);
    if (n_workers == 1 || n_paths < 2 * n_workers) {
        fill_paths(model, kernel, times, lo, U, seed, 0, n_paths, e.samples);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n_paths + n_workers - 1) / n_workers;
        for (unsigned w = 0; w < n_workers; ++w) {
            const std::size_t first = w * chunk;
            const std::size_t last = std::min(n_paths, first + chunk);
            if (first >= last) break;
            pool.emplace_back([&, first, last] {
                fill_paths(model, kernel, times, lo, U, seed, first, last,
                           e.samples);
            });
        }
        for (auto& th : pool) th.join();
    }
    return e;
}

}  // namespace

PathEnsemble simulate_gflp(const LevyModel& model, const Kernel& kernel,
                           const std::vector<double>& times,
                           std::size_t n_paths, double U, std::uint64_t seed,
                           unsigned n_workers) {
    return simulate_raw(model, kernel, times, n_paths, U, seed, n_workers);
}

PathEnsemble simulate_aggregate(const LevyModel& model, const Kernel& kernel,
                                int m, const std::vector<double>& times,
                                std::size_t n_groups, double U,
                                std::uint64_t seed, unsigned n_workers) {
    if (m < 1)
        throw std::invalid_argument("simulate_aggregate: m >= 1 required");
    PathEnsemble raw = simulate_raw(model, kernel, times,
                                    n_groups * static_cast<std::size_t>(m), U,
                                    seed, n_workers);
    if (m == 1) return raw;

    PathEnsemble e = raw;
    e.n_paths = n_groups;
    e.aggregation_m = m;
    const std::size_t k = times.size();
    e.samples.assign(n_groups * k, 0.0);
    for (std::size_t g = 0; g < n_groups; ++g)
        for (int i = 0; i < m; ++i)
            for (std::size_t j = 0; j < k; ++j)
                e.samples[g * k + j] +=
                    raw.samples[(g * m + i) * k + j];
    for (double& b : e.variance_bias_bound) b *= m;
    return e;
}

namespace {

std::vector<std::size_t> column_indices(const PathEnsemble& ensemble,
                                        const ExponentQuery& query) {
    query.validate();
    std::vector<std::size_t> cols;
    for (double t : query.times) {
        auto it = std::find(ensemble.times.begin(), ensemble.times.end(), t);
        if (it == ensemble.times.end())
            throw std::invalid_argument(
                "empirical_cf: query time not present in ensemble");
        cols.push_back(static_cast<std::size_t>(it - ensemble.times.begin()));
    }
    return cols;
}

}  // namespace

CfEstimate empirical_cf(const PathEnsemble& ensemble,
                        const ExponentQuery& query) {
    const auto cols = column_indices(ensemble, query);
    const std::size_t n = ensemble.n_paths;
    const std::size_t k = ensemble.times.size();

    double sum_c = 0.0, sum_s = 0.0, sum_c2 = 0.0, sum_s2 = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        double arg = 0.0;
        for (std::size_t j = 0; j < cols.size(); ++j)
            arg += query.thetas[j] * ensemble.samples[p * k + cols[j]];
        const double c = std::cos(arg), s = std::sin(arg);
        sum_c += c;
        sum_s += s;
        sum_c2 += c * c;
        sum_s2 += s * s;
    }
    CfEstimate est;
    est.n = n;
    est.re = sum_c / n;
    est.im = sum_s / n;
    if (n > 1) {
        const double var_c =
            std::max(0.0, (sum_c2 - n * est.re * est.re) / (n - 1.0));
        const double var_s =
            std::max(0.0, (sum_s2 - n * est.im * est.im) / (n - 1.0));
        est.stderr_re = std::sqrt(var_c / n);
        est.stderr_im = std::sqrt(var_s / n);
    }
    return est;
}

CfMatchReport cf_match_test(const PathEnsemble& ensemble,
                            const ExponentOracle& oracle,
                            const std::vector<ExponentQuery>& queries,
                            double z_threshold) {
    if (queries.empty())
        throw std::invalid_argument("cf_match_test: queries must be nonempty");
    CfMatchReport report;
    report.z_threshold = z_threshold;
    report.pass = true;

    for (const auto& q : queries) {
        CfMatchPoint pt;
        pt.query = q;
        pt.empirical = empirical_cf(ensemble, q);
        pt.psi = oracle(q);
        pt.cf_expected = std::exp(-pt.psi);

        // |exp(-psi_U) - exp(-psi)| <= |psi - psi_U| <= envelope tail of
        // the exponent integral over |u| > U, times m for aggregated rows
        if (ensemble.env_power < -0.5) {
            double coeff = 0.0;
            for (std::size_t j = 0; j < q.times.size(); ++j) {
                auto it = std::find(ensemble.times.begin(),
                                    ensemble.times.end(), q.times[j]);
                const std::size_t col =
                    static_cast<std::size_t>(it - ensemble.times.begin());
                coeff += std::abs(q.thetas[j]) * ensemble.env_coeff[col];
            }
            if (coeff > 0.0)
                pt.bias_bound =
                    ensemble.aggregation_m *
                    power_tail_mass(0.5 * ensemble.model_m2 * coeff * coeff,
                                    2.0 * ensemble.env_power,
                                    ensemble.truncation_radius,
                                    ensemble.two_sided);
        }

        auto z_of = [&](double diff, double se) {
            const double excess = std::max(0.0, std::abs(diff) - pt.bias_bound);
            if (excess == 0.0) return 0.0;
            if (se == 0.0) return std::numeric_limits<double>::infinity();
            return excess / se;
        };
        pt.z_re = z_of(pt.empirical.re - pt.cf_expected, pt.empirical.stderr_re);
        pt.z_im = z_of(pt.empirical.im, pt.empirical.stderr_im);
        pt.pass = pt.z_re <= z_threshold && pt.z_im <= z_threshold;

        report.max_abs_z = std::max({report.max_abs_z, pt.z_re, pt.z_im});
        report.pass = report.pass && pt.pass;
        report.points.push_back(std::move(pt));
    }

    // two-sided normal tail per component, Bonferroni over 2*|queries|
    const double tail = std::erfc(z_threshold / std::sqrt(2.0));
    std::ostringstream os;
    os << "familywise false-alarm bound (Bonferroni, " << 2 * queries.size()
       << " comparisons at |z| <= " << z_threshold
       << "): " << 2.0 * queries.size() * tail;
    report.bonferroni_note = os.str();
    return report;
}

std::vector<MomentRow> ensemble_moments(const PathEnsemble& ensemble) {
    if (ensemble.n_paths < 2)
        throw std::invalid_argument("ensemble_moments: need n_paths >= 2");
    const std::size_t n = ensemble.n_paths;
    const std::size_t k = ensemble.times.size();
    std::vector<MomentRow> rows(k);

    for (std::size_t j = 0; j < k; ++j) {
        double sum = 0.0;
        for (std::size_t p = 0; p < n; ++p) sum += ensemble.at(p, j);
        const double mean = sum / n;
        double m2 = 0.0, m4 = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            const double d = ensemble.at(p, j) - mean;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        const double var = m2 / (n - 1.0);
        m4 /= n;
        // Var(s^2) ~ (m4 - (n-3)/(n-1) s^4)/n
        const double var_of_var =
            std::max(0.0, (m4 - (n - 3.0) / (n - 1.0) * var * var) / n);
        rows[j] = {ensemble.times[j], mean, var, std::sqrt(var / n),
                   std::sqrt(var_of_var)};
    }
    return rows;
}

}  // namespace dilastab
