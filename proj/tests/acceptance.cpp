// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dilastab/experiments.hpp"

using namespace dilastab;

namespace {

int g_failures = 0;

class Criterion {
public:
    Criterion(int number, std::string title, double runtime_limit_s)
        : number_(number),
          title_(std::move(title)),
          limit_(runtime_limit_s),
          start_(std::chrono::steady_clock::now()) {}

    void require(bool ok, const std::string& what) {
        if (!ok) {
            issues_ += (issues_.empty() ? "" : "; ") + what;
            ok_ = false;
        }
    }

    void finish() {
        const double dt = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start_)
                              .count();
        if (dt >= limit_) {
            ok_ = false;
            issues_ += (issues_.empty() ? "" : "; ") + std::string("runtime ") +
                       std::to_string(dt) + " s exceeds " +
                       std::to_string(limit_) + " s";
        }
        std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n",
                    ok_ ? "PASS" : "FAIL", number_, title_.c_str(), dt,
                    issues_.empty() ? "" : " -- ", issues_.c_str());
        std::fflush(stdout);
        if (!ok_) ++g_failures;
    }

private:
    int number_;
    std::string title_;
    double limit_;
    std::chrono::steady_clock::time_point start_;
    bool ok_ = true;
    std::string issues_;
};

std::string describe(double got, double bound) {
    std::ostringstream os;
    os << got << " vs bound " << bound;
    return os.str();
}

const LevyModel kTwoPoint(JumpFamily::TwoPointSymmetric, 1.0, 1.0);
const std::vector<std::vector<double>> kTimes12{{1.0}, {1.0, 2.0}};

ExponentOracle gflp_oracle(const Kernel& kernel, const QuadratureConfig& cfg) {
    return [kernel, cfg](const ExponentQuery& q) {
        return gflp_exponent(kTwoPoint, kernel, q, cfg).value;
    };
}

void criterion1_kernel_functional_equation() {
    Criterion c(1, "kernel functional equation, 1e4 seeded samples <= 1e-10", 1.0);
    const Kernel kernels[] = {sub_fractional(0.6),  sub_fractional(0.75),
                              sub_fractional(0.9),  log_fractional(),
                              sghir(0.5),           sghir(1.0),
                              sghir(1.5),           fractional_ma(0.7)};
    for (const auto& k : kernels) {
        const double dev =
            check_kernel_scaling(k, *k.claimed_law(), 10000, 20240811);
        c.require(dev <= 1e-10, k.name() + ": " + describe(dev, 1e-10));
    }
    c.finish();
}

void criterion2_dilative_stability_quadrature() {
    Criterion c(2, "dilative stability of three kernels via quadrature", 30.0);
    const QuadratureConfig cfg;
    const std::vector<double> thetas{0.5, 1.0, 2.0}, Ts{0.5, 2.0, 5.0};
    struct Case {
        Kernel kernel;
        ScalingLaw law;
    } cases[] = {{sub_fractional(0.7), {0.7, 1.0}},
                 {sghir(1.0), {0.5, -1.0}},
                 {log_fractional(), {0.5, 1.0}}};
    for (const auto& cs : cases) {
        const auto report = verify_dilative_stability(
            gflp_oracle(cs.kernel, cfg), cs.law, kTimes12, thetas, Ts, 1e-3);
        c.require(report.pass,
                  cs.kernel.name() + ": " + describe(report.max_rel_err, 1e-3));
    }
    c.finish();
}

void criterion3_covariance_closed_form() {
    Criterion c(3, "covariance oracle matches the sub-fractional closed form", 5.0);
    const QuadratureConfig cfg;
    const Kernel k = sub_fractional(0.75);
    const double H = 0.75;
    double worst = 0.0;
    for (double s : {0.5, 1.0, 2.0}) {
        for (double t : {0.5, 1.0, 2.0}) {
            const double got = gflp_covariance(kTwoPoint, k, s, t, cfg).value;
            const double want =
                std::pow(t, 2 * H) + std::pow(s, 2 * H) -
                0.5 * (std::pow(s + t, 2 * H) + std::pow(std::abs(t - s), 2 * H));
            worst = std::max(worst, std::abs(got - want));
        }
    }
    c.require(worst <= 1e-4, "grid abs err " + describe(worst, 1e-4));
    const double spot = gflp_covariance(kTwoPoint, k, 1.0, 1.0, cfg).value;
    c.require(std::abs(spot - (2.0 - std::sqrt(2.0))) <= 1e-4,
              "spot (1,1) " + describe(spot, 2.0 - std::sqrt(2.0)));
    c.finish();
}

void criterion4_nonuniqueness() {
    Criterion c(4, "well-balanced stable exponent verifies two laws, rejects a third", 10.0);
    const QuadratureConfig cfg;
    const Kernel wb = well_balanced(0.6, 1.5);
    const ExponentOracle oracle = [&](const ExponentQuery& q) {
        return stable_exponent(wb, 1.5, 1.0, q, cfg).value;
    };
    const std::vector<double> thetas{0.5, 1.0, 2.0}, Ts{0.5, 2.0, 5.0};
    const ScalingLaw self_similar{0.6, 0.0};
    const ScalingLaw convolution{0.6 - 1.0 / 1.5 + 0.5, 1.0};
    const ScalingLaw wrong{0.6, 1.0};

    const auto r1 = verify_dilative_stability(oracle, self_similar, kTimes12,
                                              thetas, Ts, 1e-3);
    c.require(r1.pass, "(0.6,0): " + describe(r1.max_rel_err, 1e-3));
    const auto r2 = verify_dilative_stability(oracle, convolution, kTimes12,
                                              thetas, Ts, 1e-3);
    c.require(r2.pass, "(0.4333,1): " + describe(r2.max_rel_err, 1e-3));
    const auto r3 =
        verify_dilative_stability(oracle, wrong, kTimes12, thetas, Ts, 1e-3);
    c.require(!r3.pass && r3.max_rel_err >= 10.0 * 1e-3,
              "(0.6,1) must fail by >= 10x tol: " +
                  describe(r3.max_rel_err, 1e-2));
    c.finish();
}

void criterion5_zbeta() {
    Criterion c(5, "aggregated-AR(1) exponent laws and nested self-consistency", 120.0);
    const QuadratureConfig cfg;
    const std::vector<double> thetas{0.5, 1.0}, Ts{0.5, 2.0};
    for (double beta : {-0.5, 0.0, 0.5}) {
        const ExponentOracle oracle = [beta, cfg](const ExponentQuery& q) {
            return zbeta_exponent(beta, 1.0, q, cfg).value;
        };
        const ScalingLaw law{1.0 - beta / 2.0, -beta - 1.0};
        const auto report = verify_dilative_stability(oracle, law, kTimes12,
                                                      thetas, Ts, 1e-2);
        std::ostringstream tag;
        tag << "beta=" << beta;
        c.require(report.pass,
                  tag.str() + ": " + describe(report.max_rel_err, 1e-2));

        // halved tolerances must move values by less than the reported error
        const ExponentQuery probes[] = {{{1.0}, {1.0}}, {{1.0, 2.0}, {0.5, 0.5}}};
        for (const auto& q : probes) {
            const ExponentValue coarse = zbeta_exponent(beta, 1.0, q, cfg);
            QuadratureConfig fine = cfg;
            fine.rel_tol *= 0.5;
            fine.abs_tol *= 0.5;
            const ExponentValue refined = zbeta_exponent(beta, 1.0, q, fine);
            c.require(std::abs(coarse.value - refined.value) <=
                          coarse.err_estimate,
                      tag.str() + " self-consistency: " +
                          describe(std::abs(coarse.value - refined.value),
                                   coarse.err_estimate));
        }
    }
    c.finish();
}

void criterion6_conversions() {
    Criterion c(6, "parameter conversions: round trips and the teletraffic map", 1.0);
    std::mt19937_64 rng(20240811);
    auto draw = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        ScalingLaw law{draw(-3.0, 3.0), 0.0};
        do {
            law.delta = draw(-3.0, 3.0);
        } while (std::abs(law.delta) < 1e-3);
        const ScalingLaw back = as_to_ds(ds_to_as(law));
        worst = std::max(worst, std::abs(back.alpha - law.alpha) /
                                    std::max(1.0, std::abs(law.alpha)));
        worst = std::max(worst, std::abs(back.delta - law.delta) /
                                    std::max(1.0, std::abs(law.delta)));

        AggregateSimilarityLaw as{draw(-3.0, 3.0), 0.0};
        do {
            as.rho2 = draw(-3.0, 3.0);
        } while (std::abs(as.rho2) < 1e-3);
        const AggregateSimilarityLaw back2 = ds_to_as(as_to_ds(as));
        worst = std::max(worst, std::abs(back2.rho1 - as.rho1) /
                                    std::max(1.0, std::abs(as.rho1)));
        worst = std::max(worst, std::abs(back2.rho2 - as.rho2) /
                                    std::max(1.0, std::abs(as.rho2)));
    }
    c.require(worst <= 1e-14, "round trip " + describe(worst, 1e-14));

    for (double gamma : {1.2, 1.5, 1.8}) {
        const double rho = 1.0 / (gamma - 1.0);
        const ScalingLaw got = as_to_ds({rho, rho});
        const double err =
            std::max(std::abs(got.alpha - (3.0 - gamma) / 2.0),
                     std::abs(got.delta - (1.0 - gamma)));
        std::ostringstream tag;
        tag << "gamma=" << gamma;
        c.require(err <= 1e-14, tag.str() + " " + describe(err, 1e-14));
    }
    c.finish();
}

void criterion7_aggregate_similarity() {
    Criterion c(7, "exponent-level aggregate similarity", 20.0);
    const ExponentOracle levy = [](const ExponentQuery& q) {
        return kTwoPoint.multi_time_exponent(q.times, q.thetas);
    };
    const std::vector<double> thetas{0.5, 1.0, 2.0};
    const auto exact = verify_aggregate_similarity(levy, {0.0, -1.0}, {2, 3, 4},
                                                   kTimes12, thetas, 1e-12);
    c.require(exact.pass,
              "driver (0,-1): " + describe(exact.max_rel_err, 1e-12));

    const QuadratureConfig cfg;
    const auto law = ds_to_as({0.7, 1.0});
    const auto quad = verify_aggregate_similarity(
        gflp_oracle(sub_fractional(0.7), cfg), law, {2, 3, 4}, kTimes12,
        thetas, 1e-3);
    c.require(quad.pass,
              "sub-fractional via conversion: " +
                  describe(quad.max_rel_err, 1e-3));
    c.finish();
}

void criterion8_monte_carlo() {
    Criterion c(8, "Monte Carlo consistency at n = 2e4", 120.0);
    const QuadratureConfig cfg;
    const Kernel k = sub_fractional(0.75);
    const std::vector<double> times{1.0, 2.0, 4.0};
    const std::uint64_t seed = 20240811;
    const auto e = simulate_gflp(kTwoPoint, k, times, 20000, 50.0, seed, 4);

    // isometry at every requested time
    const auto rows = ensemble_moments(e);
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const double target =
            gflp_covariance(kTwoPoint, k, rows[j].t, rows[j].t, cfg).value;
        const double slack =
            3.0 * rows[j].stderr_variance + e.variance_bias_bound[j];
        std::ostringstream tag;
        tag << "variance at t=" << rows[j].t;
        c.require(std::abs(rows[j].variance - target) <= slack,
                  tag.str() + ": " +
                      describe(std::abs(rows[j].variance - target), slack));
    }

    // empirical CF against the quadrature oracle on a 6-query grid
    const std::vector<ExponentQuery> queries{
        {{1.0}, {0.5}},           {{1.0}, {1.0}},
        {{2.0}, {0.5}},           {{2.0}, {1.0}},
        {{1.0, 2.0}, {0.5, 0.5}}, {{1.0, 2.0}, {1.0, 1.0}}};
    const auto cf = cf_match_test(e, gflp_oracle(k, cfg), queries, 4.0);
    c.require(cf.pass, "cf match max|z| " + describe(cf.max_abs_z, 4.0));

    // exponent recovery from sample variances
    std::vector<VarianceSample> samples;
    for (const auto& r : rows)
        samples.push_back({r.t, r.variance, r.stderr_variance});
    const auto est = estimate_alpha_from_variance(samples);
    c.require(std::abs(est.alpha_hat - 0.75) <= 0.05,
              "alpha_hat " + describe(est.alpha_hat, 0.75));

    // distribution-level aggregate similarity at m = 4
    const int m = 4;
    const auto as = ds_to_as({0.75, 1.0});
    const double space = std::pow(m, as.rho1);
    const std::vector<double> base_times{0.5, 1.0};
    std::vector<double> scaled_times(base_times);
    for (double& t : scaled_times) t *= std::pow(m, -as.rho2);
    const auto summed =
        simulate_aggregate(kTwoPoint, k, m, base_times, 5000, 50.0, seed, 4);
    const auto rescaled =
        simulate_gflp(kTwoPoint, k, scaled_times, 20000, 50.0, seed + 1, 4);
    for (std::size_t j = 0; j < base_times.size(); ++j) {
        for (double theta : {0.5, 1.0}) {
            const auto lhs = empirical_cf(summed, {{base_times[j]}, {theta}});
            const auto rhs =
                empirical_cf(rescaled, {{scaled_times[j]}, {space * theta}});
            const double se = std::hypot(lhs.stderr_re, rhs.stderr_re);
            std::ostringstream tag;
            tag << "aggregate CF at t=" << base_times[j] << " theta=" << theta;
            c.require(std::abs(lhs.re - rhs.re) <= 4.0 * se + 2e-3,
                      tag.str() + ": " +
                          describe(std::abs(lhs.re - rhs.re), 4.0 * se + 2e-3));
        }
    }
    c.finish();
}

void criterion9_fg_dilative() {
    Criterion c(9, "(f,g)-dilative stability of the Wiener exponent", 5.0);
    const ExponentOracle oracle = [](const ExponentQuery& q) {
        return wiener_exponent(q);
    };
    const std::vector<double> thetas{0.5, 1.0, 2.0}, Ts{0.5, 2.0, 5.0};

    const GeneralizedScalingLaw power{LawFunction::power(1.0 / 3.0),
                                      LawFunction::power(1.0 / 3.0)};
    const auto r1 =
        verify_fg_dilative(oracle, power, kTimes12, thetas, Ts, 1e-12);
    c.require(r1.pass, "power pair: " + describe(r1.max_rel_err, 1e-12));

    auto h = [](double T) { return 1.0 + std::abs(std::log(T)); };
    const GeneralizedScalingLaw nonpower{
        LawFunction::custom([h](double T) { return std::sqrt(T / h(T)); },
                            "sqrt(T/(1+|log T|))"),
        LawFunction::custom(h, "1+|log T|")};
    const auto r2 =
        verify_fg_dilative(oracle, nonpower, kTimes12, thetas, Ts, 1e-12);
    c.require(r2.pass, "non-power pair: " + describe(r2.max_rel_err, 1e-12));

    const GeneralizedScalingLaw broken{LawFunction::power(1.0),
                                       LawFunction::power(1.0)};
    const auto r3 =
        verify_fg_dilative(oracle, broken, kTimes12, thetas, Ts, 1e-12);
    c.require(!r3.pass, "violating pair must fail");
    c.finish();
}

void criterion10_reproducibility() {
    Criterion c(10, "byte-identical ensembles and reports across worker counts", 60.0);
    namespace fs = std::filesystem;
    const Kernel k = sub_fractional(0.75);
    const std::vector<double> times{1.0, 2.0, 4.0};

    const auto a = simulate_gflp(kTwoPoint, k, times, 20000, 50.0, 20240811, 1);
    const auto b = simulate_gflp(kTwoPoint, k, times, 20000, 50.0, 20240811, 4);
    c.require(a.samples.size() == b.samples.size() &&
                  std::memcmp(a.samples.data(), b.samples.data(),
                              a.samples.size() * sizeof(double)) == 0,
              "plain ensembles differ across worker counts");

    const auto ga = simulate_aggregate(kTwoPoint, k, 4, {0.5, 1.0}, 5000, 50.0,
                                       20240811, 1);
    const auto gb = simulate_aggregate(kTwoPoint, k, 4, {0.5, 1.0}, 5000, 50.0,
                                       20240811, 3);
    c.require(std::memcmp(ga.samples.data(), gb.samples.data(),
                          ga.samples.size() * sizeof(double)) == 0,
              "aggregate ensembles differ across worker counts");

    const fs::path dir =
        fs::temp_directory_path() / "dilastab_acceptance_repro";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto read_all = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    write_ensemble_csv(a, (dir / "a.csv").string());
    write_ensemble_csv(b, (dir / "b.csv").string());
    write_ensemble_meta(a, (dir / "a.meta.json").string(), false);
    write_ensemble_meta(b, (dir / "b.meta.json").string(), false);
    c.require(read_all(dir / "a.csv") == read_all(dir / "b.csv"),
              "ensemble CSVs differ");
    c.require(read_all(dir / "a.meta.json") == read_all(dir / "b.meta.json"),
              "ensemble metadata differs");
    fs::remove_all(dir);
    c.finish();
}

}  // namespace

int main() {
    criterion1_kernel_functional_equation();
    criterion2_dilative_stability_quadrature();
    criterion3_covariance_closed_form();
    criterion4_nonuniqueness();
    criterion5_zbeta();
    criterion6_conversions();
    criterion7_aggregate_similarity();
    criterion8_monte_carlo();
    criterion9_fg_dilative();
    criterion10_reproducibility();
    if (g_failures == 0) std::printf("all acceptance criteria pass\n");
    return g_failures;
}
