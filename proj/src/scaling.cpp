#include "dilastab/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dilastab {

namespace {

constexpr double kRelErrFloor = 1e-12;

double guarded_rel_err(double lhs, double rhs) {
    const double denom =
        std::max({std::abs(lhs), std::abs(rhs), kRelErrFloor});
    return std::abs(lhs - rhs) / denom;
}

std::string grid_desc(std::size_t n_times, std::size_t n_theta,
                      std::size_t n_scale, const char* scale_name) {
    std::ostringstream os;
    os << n_times << " time tuples x " << n_theta << " thetas x " << n_scale
       << " " << scale_name;
    return os.str();
}

void finalize(VerificationReport& report, double tol) {
    report.tol = tol;
    report.max_rel_err = 0.0;
    bool all_determinate = true;
    for (const auto& p : report.points) {
        if (!p.determinate) {
            all_determinate = false;
            continue;
        }
        report.max_rel_err = std::max(report.max_rel_err, p.rel_err);
    }
    report.pass = all_determinate && report.max_rel_err <= tol;
}

// Shared loop: rhs_weight(T) * psi(times, rhs_scale(T) * thetas) against
// psi(T * times, thetas).
template <typename WeightFn, typename SpaceFn>
VerificationReport verify_scaling_relation(
    const ExponentOracle& oracle, std::string law_desc,
    const std::vector<std::vector<double>>& times_grid,
    const std::vector<double>& theta_grid,
    const std::vector<double>& scale_grid, const char* scale_name, double tol,
    WeightFn&& weight, SpaceFn&& space) {
    if (times_grid.empty() || theta_grid.empty() || scale_grid.empty())
        throw std::invalid_argument("verification grids must be nonempty");

    VerificationReport report;
    report.law = std::move(law_desc);
    report.grid = grid_desc(times_grid.size(), theta_grid.size(),
                            scale_grid.size(), scale_name);

    for (const auto& times : times_grid) {
        for (double theta : theta_grid) {
            for (double T : scale_grid) {
                VerificationPoint pt;
                pt.scale = T;
                pt.times = times;
                pt.thetas.assign(times.size(), theta);
                try {
                    ExponentQuery lhs_q;
                    lhs_q.times = times;
                    for (double& t : lhs_q.times) t *= T;
                    lhs_q.thetas = pt.thetas;
                    pt.lhs = oracle(lhs_q);

                    ExponentQuery rhs_q;
                    rhs_q.times = times;
                    rhs_q.thetas.assign(times.size(), space(T) * theta);
                    pt.rhs = weight(T) * oracle(rhs_q);
                    pt.rel_err = guarded_rel_err(pt.lhs, pt.rhs);
                } catch (const std::exception& e) {
                    pt.determinate = false;
                    pt.error = e.what();
                }
                report.points.push_back(std::move(pt));
            }
        }
    }
    finalize(report, tol);
    return report;
}

}  // namespace

LawFunction LawFunction::power(double exponent) {
    LawFunction f;
    f.is_power_ = true;
    f.exponent_ = exponent;
    std::ostringstream os;
    os << "T^" << exponent;
    f.label_ = os.str();
    return f;
}

LawFunction LawFunction::custom(std::function<double(double)> fn,
                                std::string label) {
    LawFunction f;
    f.is_power_ = false;
    f.fn_ = std::move(fn);
    f.label_ = std::move(label);
    return f;
}

double LawFunction::operator()(double T) const {
    if (!(T > 0.0))
        throw std::invalid_argument("LawFunction: T must be positive");
    const double v = is_power_ ? std::pow(T, exponent_) : fn_(T);
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("LawFunction: law value must be positive");
    return v;
}

VerificationReport verify_dilative_stability(
    const ExponentOracle& oracle, const ScalingLaw& law,
    const std::vector<std::vector<double>>& times_grid,
    const std::vector<double>& theta_grid, const std::vector<double>& T_grid,
    double tol) {
    std::ostringstream os;
    os << "dilative-stability (alpha=" << law.alpha << ", delta=" << law.delta
       << ")";
    const double space_exp = law.alpha - 0.5 * law.delta;
    return verify_scaling_relation(
        oracle, os.str(), times_grid, theta_grid, T_grid, "T values", tol,
        [&](double T) { return std::pow(T, law.delta); },
        [&](double T) { return std::pow(T, space_exp); });
}

VerificationReport verify_fg_dilative(
    const ExponentOracle& oracle, const GeneralizedScalingLaw& law,
    const std::vector<std::vector<double>>& times_grid,
    const std::vector<double>& theta_grid, const std::vector<double>& T_grid,
    double tol) {
    std::ostringstream os;
    os << "fg-dilative-stability (f=" << law.space.label()
       << ", g=" << law.weight.label() << ")";
    return verify_scaling_relation(
        oracle, os.str(), times_grid, theta_grid, T_grid, "T values", tol,
        [&](double T) { return law.weight(T); },
        [&](double T) { return law.space(T); });
}

VerificationReport verify_aggregate_similarity(
    const ExponentOracle& oracle, const AggregateSimilarityLaw& law,
    const std::vector<int>& m_list,
    const std::vector<std::vector<double>>& times_grid,
    const std::vector<double>& theta_grid, double tol) {
    if (m_list.empty())
        throw std::invalid_argument("verify_aggregate_similarity: empty m list");
    for (int m : m_list)
        if (m < 1)
            throw std::invalid_argument(
                "verify_aggregate_similarity: m must be a positive integer");
    if (times_grid.empty() || theta_grid.empty())
        throw std::invalid_argument("verification grids must be nonempty");

    std::ostringstream os;
    os << "aggregate-similarity (rho1=" << law.rho1 << ", rho2=" << law.rho2
       << ")";
    VerificationReport report;
    report.law = os.str();
    report.grid = grid_desc(times_grid.size(), theta_grid.size(),
                            m_list.size(), "m values");

    for (const auto& times : times_grid) {
        for (double theta : theta_grid) {
            for (int m : m_list) {
                VerificationPoint pt;
                pt.scale = static_cast<double>(m);
                pt.times = times;
                pt.thetas.assign(times.size(), theta);
                try {
                    ExponentQuery base;
                    base.times = times;
                    base.thetas = pt.thetas;
                    pt.lhs = static_cast<double>(m) * oracle(base);

                    const double md = static_cast<double>(m);
                    ExponentQuery agg;
                    agg.times = times;
                    for (double& t : agg.times) t *= std::pow(md, -law.rho2);
                    agg.thetas.assign(times.size(),
                                      std::pow(md, law.rho1) * theta);
                    pt.rhs = oracle(agg);
                    pt.rel_err = guarded_rel_err(pt.lhs, pt.rhs);
                } catch (const std::exception& e) {
                    pt.determinate = false;
                    pt.error = e.what();
                }
                report.points.push_back(std::move(pt));
            }
        }
    }
    finalize(report, tol);
    return report;
}

AggregateSimilarityLaw ds_to_as(const ScalingLaw& law) {
    if (law.delta == 0.0)
        throw std::invalid_argument(
            "ds_to_as: delta = 0 (purely self-similar case) has no "
            "aggregate-similarity parameters");
    return {0.5 - law.alpha / law.delta, -1.0 / law.delta};
}

ScalingLaw as_to_ds(const AggregateSimilarityLaw& law) {
    if (law.rho2 == 0.0)
        throw std::invalid_argument("as_to_ds: rho2 must be nonzero");
    return {law.rho1 / law.rho2 - 0.5 / law.rho2, -1.0 / law.rho2};
}

std::function<bool(const ScalingLaw&)> stable_family_laws(double H) {
    if (!(H >= 0.5))
        throw std::invalid_argument("stable_family_laws: H >= 1/2 required");
    return [H](const ScalingLaw& law) {
        const double lhs =
            law.delta + (law.alpha - 0.5 * law.delta) / H;
        return std::abs(lhs - 1.0) <= 1e-12;
    };
}

VerificationReport moment_scaling_check(
    const std::function<double(double)>& mean_fn,
    const std::function<double(double)>& var_fn, const ScalingLaw& law,
    const std::vector<double>& t_grid, const std::vector<double>& T_grid,
    double tol) {
    if (!var_fn) throw std::invalid_argument("moment_scaling_check: var_fn required");
    if (t_grid.empty() || T_grid.empty())
        throw std::invalid_argument("moment_scaling_check: grids must be nonempty");

    constexpr double kMeanFloor = 1e-10;
    std::ostringstream os;
    os << "moment-scaling (alpha=" << law.alpha << ", delta=" << law.delta << ")";
    VerificationReport report;
    report.law = os.str();
    report.grid = grid_desc(t_grid.size(), 1, T_grid.size(), "T values");

    for (double t : t_grid) {
        for (double T : T_grid) {
            VerificationPoint var_pt;
            var_pt.scale = T;
            var_pt.times = {t};
            try {
                const double v_t = var_fn(t);
                if (!(v_t > 0.0))
                    throw std::invalid_argument("variance must be positive on grid");
                var_pt.lhs = var_fn(T * t);
                var_pt.rhs = std::pow(T, 2.0 * law.alpha) * v_t;
                var_pt.rel_err = guarded_rel_err(var_pt.lhs, var_pt.rhs);
            } catch (const std::exception& e) {
                var_pt.determinate = false;
                var_pt.error = e.what();
            }
            report.points.push_back(std::move(var_pt));

            if (!mean_fn) continue;
            VerificationPoint mean_pt;
            mean_pt.scale = T;
            mean_pt.times = {t};
            try {
                const double m_t = mean_fn(t);
                const double m_Tt = mean_fn(T * t);
                if (std::abs(m_t) < kMeanFloor && std::abs(m_Tt) < kMeanFloor)
                    continue;  // centered: the mean leg is vacuous
                mean_pt.lhs = m_Tt;
                mean_pt.rhs = std::pow(T, law.alpha + 0.5 * law.delta) * m_t;
                mean_pt.rel_err = guarded_rel_err(mean_pt.lhs, mean_pt.rhs);
            } catch (const std::exception& e) {
                mean_pt.determinate = false;
                mean_pt.error = e.what();
            }
            report.points.push_back(std::move(mean_pt));
        }
    }
    finalize(report, tol);
    return report;
}

AlphaEstimate estimate_alpha_from_variance(
    const std::vector<VarianceSample>& samples) {
    if (samples.size() < 2)
        throw std::invalid_argument(
            "estimate_alpha_from_variance: need at least two samples");
    bool distinct = false;
    for (const auto& s : samples) {
        if (!(s.T > 0.0) || !(s.variance > 0.0))
            throw std::invalid_argument(
                "estimate_alpha_from_variance: T and variances must be positive");
        if (s.T != samples.front().T) distinct = true;
    }
    if (!distinct)
        throw std::invalid_argument(
            "estimate_alpha_from_variance: all T equal (degenerate design)");

    // y = log var, sigma_y = stderr/var by the delta method; exact inputs
    // (stderr 0) get a tiny floor so the weights stay finite.
    constexpr double kSigmaFloor = 1e-15;
    double sw = 0.0, swx = 0.0, swy = 0.0;
    std::vector<double> x(samples.size()), y(samples.size()), w(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        x[i] = std::log(samples[i].T);
        y[i] = std::log(samples[i].variance);
        const double sy = std::max(
            samples[i].stderr_variance / samples[i].variance, kSigmaFloor);
        w[i] = 1.0 / (sy * sy);
        sw += w[i];
        swx += w[i] * x[i];
        swy += w[i] * y[i];
    }
    const double xbar = swx / sw, ybar = swy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
        sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
    }
    if (!(sxx > 0.0))
        throw std::invalid_argument(
            "estimate_alpha_from_variance: degenerate design");
    AlphaEstimate est;
    est.alpha_hat = 0.5 * sxy / sxx;
    est.stderr = 0.5 / std::sqrt(sxx);
    return est;
}

namespace {

// Space exponent b solving psi_1(T^b theta_a) = psi_T(theta_a) / T^delta
// for one probe T: closed-form initializer from a local log-log power
// model of psi_1 between theta_a and theta_b, then secant refinement.
double solve_space_exponent(const ExponentOracle& oracle, double delta,
                            double T, double theta_a, double theta_b) {
    auto psi1 = [&](double theta) {
        return oracle({{1.0}, {theta}});
    };
    const double pa = psi1(theta_a);
    const double pb = psi1(theta_b);
    const double target = oracle({{T}, {theta_a}}) / std::pow(T, delta);
    if (!(pa > 0.0) || !(pb > 0.0) || !(target > 0.0))
        throw SearchError("estimate_law_from_exponent: oracle not positive on probes");

    const double q = std::log(pb / pa) / std::log(theta_b / theta_a);
    static constexpr double kMaxExp = 24.0;  // keeps T^b theta in floating range
    auto clamp_b = [](double bb) { return std::clamp(bb, -kMaxExp, kMaxExp); };
    double b = clamp_b(std::log(target / pa) / (q * std::log(T)));

    auto F = [&](double bb) {
        const double psi = psi1(std::pow(T, bb) * theta_a);
        if (!(psi > 0.0) || !std::isfinite(psi))
            return bb > 0.0 ? 1e6 : -1e6;  // push the secant back inward
        return std::log(psi) - std::log(target);
    };
    double b0 = b, f0 = F(b0);
    double b1 = clamp_b(b + (std::abs(f0) > 1e-15 ? 0.05 : 0.0));
    if (b1 != b0) {
        double f1 = F(b1);
        for (int it = 0; it < 24 && std::abs(f1) > 1e-13; ++it) {
            const double df = f1 - f0;
            if (df == 0.0) break;
            const double b2 = clamp_b(b1 - f1 * (b1 - b0) / df);
            b0 = b1;
            f0 = f1;
            b1 = b2;
            f1 = F(b1);
        }
        b = std::abs(f1) < std::abs(f0) ? b1 : b0;
    }
    return b;
}

}  // namespace

LawEstimate estimate_law_from_exponent(const ExponentOracle& oracle,
                                       const LawSearchConfig& cfg) {
    if (cfg.probe_T.empty() || cfg.residual_T.empty() ||
        cfg.residual_thetas.empty())
        throw std::invalid_argument("estimate_law_from_exponent: empty probes");

    auto residual_at = [&](const ScalingLaw& law) {
        const double space_exp = law.alpha - 0.5 * law.delta;
        double acc = 0.0;
        std::size_t n = 0;
        for (double T : cfg.residual_T) {
            for (double theta : cfg.residual_thetas) {
                const double lhs = oracle({{T}, {theta}});
                const double rhs =
                    std::pow(T, law.delta) *
                    oracle({{1.0}, {std::pow(T, space_exp) * theta}});
                const double r = guarded_rel_err(lhs, rhs);
                acc += r * r;
                ++n;
            }
        }
        return std::sqrt(acc / static_cast<double>(n));
    };

    auto alpha_given_delta = [&](double delta) {
        double sum = 0.0;
        for (double T : cfg.probe_T)
            sum += solve_space_exponent(oracle, delta, T, cfg.theta_a,
                                        cfg.theta_b);
        return sum / static_cast<double>(cfg.probe_T.size()) + 0.5 * delta;
    };
    auto residual_of_delta = [&](double delta) {
        return residual_at({alpha_given_delta(delta), delta});
    };

    // coarse bracket, then golden-section
    double best_delta = cfg.delta_min, best_res = 0.0;
    {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < cfg.coarse_points; ++i) {
            const double d =
                cfg.delta_min + (cfg.delta_max - cfg.delta_min) * i /
                                    (cfg.coarse_points - 1.0);
            const double r = residual_of_delta(d);
            if (r < best) {
                best = r;
                best_delta = d;
            }
        }
        best_res = best;
    }
    const double span =
        (cfg.delta_max - cfg.delta_min) / (cfg.coarse_points - 1.0);
    double lo = std::max(cfg.delta_min, best_delta - span);
    double hi = std::min(cfg.delta_max, best_delta + span);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = residual_of_delta(c), fd = residual_of_delta(d);
    for (int it = 0; it < cfg.golden_iters; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = residual_of_delta(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = residual_of_delta(d);
        }
    }
    const double delta_star = fc < fd ? c : d;
    const double res_star = std::min({fc, fd, best_res});
    if (!std::isfinite(res_star))
        throw SearchError("estimate_law_from_exponent: search diverged");

    LawEstimate out;
    out.law = {alpha_given_delta(delta_star), delta_star};
    out.residual = residual_at(out.law);

    // flat-direction probe: a direction along which the residual stays at
    // noise level flags a one-parameter family of valid laws.
    auto dir_residual = [&](double phi) {
        return residual_at({out.law.alpha + cfg.flat_step * std::cos(phi),
                            out.law.delta + cfg.flat_step * std::sin(phi)});
    };
    double min_dir = std::numeric_limits<double>::infinity();
    double max_dir = 0.0;
    double min_phi = 0.0;
    for (int k = 0; k < 32; ++k) {
        const double phi = 3.141592653589793 * k / 32.0;
        const double r = dir_residual(phi);
        if (r < min_dir) {
            min_dir = r;
            min_phi = phi;
        }
        max_dir = std::max(max_dir, r);
    }
    {  // sharpen the best angle (the residual valley is narrow)
        double alo = min_phi - 3.141592653589793 / 32.0;
        double ahi = min_phi + 3.141592653589793 / 32.0;
        double ac = ahi - gr * (ahi - alo), ad = alo + gr * (ahi - alo);
        double rc = dir_residual(ac), rd = dir_residual(ad);
        for (int it = 0; it < 40; ++it) {
            if (rc < rd) {
                ahi = ad;
                ad = ac;
                rd = rc;
                ac = ahi - gr * (ahi - alo);
                rc = dir_residual(ac);
            } else {
                alo = ac;
                ac = ad;
                rc = rd;
                ad = alo + gr * (ahi - alo);
                rd = dir_residual(ad);
            }
        }
        if (std::min(rc, rd) < min_dir) {
            min_dir = std::min(rc, rd);
            min_phi = rc < rd ? ac : ad;
        }
    }
    if (min_dir < 1e-6 && min_dir < 1e-3 * max_dir) {
        out.flat_direction_found = true;
        out.flat_dalpha = std::cos(min_phi);
        out.flat_ddelta = std::sin(min_phi);
    }
    return out;
}

}  // namespace dilastab
