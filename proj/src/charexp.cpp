#include "dilastab/charexp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dilastab {

namespace {

bool all_zero(const std::vector<double>& xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return x == 0.0; });
}

struct CombinedEnvelope {
    double coeff = 0.0;   // sum_j |theta_j| * coeff(t_j)
    double power = 0.0;
    double min_radius = 0.0;
};

CombinedEnvelope combine_envelopes(const Kernel& kernel,
                                   const ExponentQuery& q) {
    CombinedEnvelope c;
    bool have_power = false;
    for (std::size_t j = 0; j < q.times.size(); ++j) {
        const TailEnvelope env = kernel.tail_envelope(q.times[j]);
        if (env.coeff == 0.0) {
            c.min_radius = std::max(c.min_radius, env.min_radius);
            continue;
        }
        if (have_power && env.power != c.power)
            throw std::logic_error("kernel envelope power varies across times");
        c.power = env.power;
        have_power = true;
        c.coeff += std::abs(q.thetas[j]) * env.coeff;
        c.min_radius = std::max(c.min_radius, env.min_radius);
    }
    return c;
}

// Radius past which the integrand envelope coeff*|u|^power has mass below
// cfg.abs_tol, inflated by the safety multiplier and forced to cover the
// breakpoints.  Returns the certified remaining tail mass through *mass.
double choose_radius(double coeff, double power, double min_radius,
                     std::span<const double> breakpoints, bool two_sided,
                     const QuadratureConfig& cfg, double* mass) {
    double bp_reach = 1.0;
    for (double bp : breakpoints) bp_reach = std::max(bp_reach, 2.0 * std::abs(bp));
    double radius;
    if (coeff == 0.0) {
        radius = std::max({min_radius, bp_reach});
        *mass = 0.0;
        return radius;
    }
    radius = power_tail_radius(coeff, power, cfg.abs_tol, two_sided);
    radius = std::max({radius * cfg.truncation_safety, min_radius, bp_reach});
    if (!std::isfinite(radius))
        throw DivergenceError(
            "truncation radius for the requested abs_tol exceeds "
            "floating-point range (tail decays too slowly)");
    *mass = power_tail_mass(coeff, power, radius, two_sided);
    return radius;
}

}  // namespace

void ExponentQuery::validate() const {
    if (times.empty() || times.size() != thetas.size())
        throw std::invalid_argument(
            "ExponentQuery: times/thetas must be nonempty and of equal length");
    for (double t : times)
        if (!std::isfinite(t))
            throw std::invalid_argument("ExponentQuery: non-finite time");
    for (double th : thetas)
        if (!std::isfinite(th))
            throw std::invalid_argument("ExponentQuery: non-finite theta");
}

ExponentValue gflp_exponent(const LevyModel& model, const Kernel& kernel,
                            const ExponentQuery& q,
                            const QuadratureConfig& cfg) {
    q.validate();
    cfg.validate();
    if (all_zero(q.thetas)) return {0.0, 0.0};

    const CombinedEnvelope env = combine_envelopes(kernel, q);
    const double m2 = model.second_moment();
    const bool two_sided = kernel.support() == Support::WholeLine;
    const auto bps = kernel.breakpoints(q.times);

    // phi(x) <= m2 x^2 / 2 turns the kernel envelope into an integrand
    // envelope with squared coefficient and doubled power.
    double tail = 0.0;
    const double radius =
        choose_radius(0.5 * m2 * env.coeff * env.coeff, 2.0 * env.power,
                      env.min_radius, bps, two_sided, cfg, &tail);

    auto fn = [&](double u) {
        double acc = 0.0;
        for (std::size_t j = 0; j < q.times.size(); ++j)
            acc += q.thetas[j] * kernel(q.times[j], u);
        return model.exponent(acc);
    };
    const double lo = two_sided ? -radius : 0.0;
    const IntegralEstimate est = integrate_adaptive(fn, lo, radius, bps, cfg);
    return {est.value, est.err_estimate + tail};
}

ExponentValue gflp_covariance(const LevyModel& model, const Kernel& kernel,
                              double s, double t, const QuadratureConfig& cfg) {
    cfg.validate();
    const double m2 = model.second_moment();
    const TailEnvelope es = kernel.tail_envelope(s);
    const TailEnvelope et = kernel.tail_envelope(t);
    const bool two_sided = kernel.support() == Support::WholeLine;

    const double times[2] = {s, t};
    const auto bps = kernel.breakpoints(times);

    double tail = 0.0;
    double coeff = 0.0, power = 0.0;
    if (es.coeff != 0.0 && et.coeff != 0.0) {
        coeff = m2 * es.coeff * et.coeff;
        power = es.power + et.power;
    }
    const double radius =
        choose_radius(coeff, power, std::max(es.min_radius, et.min_radius),
                      bps, two_sided, cfg, &tail);

    auto fn = [&](double u) { return m2 * kernel(s, u) * kernel(t, u); };
    const double lo = two_sided ? -radius : 0.0;
    const IntegralEstimate est = integrate_adaptive(fn, lo, radius, bps, cfg);
    return {est.value, est.err_estimate + tail};
}

ExponentValue stable_exponent(const Kernel& kernel, double stable_index,
                              double sigma, const ExponentQuery& q,
                              const QuadratureConfig& cfg) {
    q.validate();
    cfg.validate();
    if (!(stable_index > 0.0 && stable_index <= 2.0))
        throw std::invalid_argument("stable_exponent: stable_index in (0,2]");
    if (!(sigma > 0.0))
        throw std::invalid_argument("stable_exponent: sigma must be positive");
    if (all_zero(q.thetas)) return {0.0, 0.0};

    const CombinedEnvelope env = combine_envelopes(kernel, q);
    const bool two_sided = kernel.support() == Support::WholeLine;
    const auto bps = kernel.breakpoints(q.times);

    double tail = 0.0;
    double coeff = 0.0, power = 0.0;
    if (env.coeff != 0.0) {
        coeff = std::pow(sigma * env.coeff, stable_index);
        power = stable_index * env.power;  // power_tail_* reject power >= -1
    }
    const double radius = choose_radius(coeff, power, env.min_radius, bps,
                                        two_sided, cfg, &tail);

    auto fn = [&](double u) {
        double acc = 0.0;
        for (std::size_t j = 0; j < q.times.size(); ++j)
            acc += q.thetas[j] * kernel(q.times[j], u);
        return std::pow(std::abs(sigma * acc), stable_index);
    };
    const double lo = two_sided ? -radius : 0.0;
    const IntegralEstimate est = integrate_adaptive(fn, lo, radius, bps, cfg);
    return {est.value, est.err_estimate + tail};
}

ExponentValue zbeta_exponent(double beta, double C, const ExponentQuery& q,
                             const QuadratureConfig& cfg) {
    q.validate();
    cfg.validate();
    if (!(beta > -1.0 && beta < 1.0))
        throw std::invalid_argument("zbeta_exponent: beta in (-1,1) required");
    if (!(C > 0.0))
        throw std::invalid_argument("zbeta_exponent: C must be positive");
    for (double t : q.times)
        if (t < 0.0)
            throw std::invalid_argument("zbeta_exponent: times must be >= 0");
    if (all_zero(q.thetas)) return {0.0, 0.0};

    const double max_t = *std::max_element(q.times.begin(), q.times.end());
    if (max_t == 0.0) return {0.0, 0.0};
    double theta_sum = 0.0;
    for (double th : q.thetas) theta_sum += std::abs(th);
    if (theta_sum == 0.0) return {0.0, 0.0};

    QuadratureConfig inner_cfg = cfg;
    inner_cfg.rel_tol = cfg.rel_tol;

    // ---- truncation of the outer x-integral --------------------------
    // near 0 the integrand is below C x^beta; far out it is below
    // C I(x)/2 with I(x) <= Th^2 max_t / x^2 + Th^2 / (2 x^3).
    double x_min =
        std::pow(cfg.abs_tol * (beta + 1.0) / C, 1.0 / (beta + 1.0));
    x_min /= cfg.truncation_safety;
    const double th2 = theta_sum * theta_sum;
    auto upper_tail = [&](double x0) {
        return 0.5 * C * th2 *
               (max_t * std::pow(x0, beta - 1.0) / (1.0 - beta) +
                std::pow(x0, beta - 2.0) / (2.0 * (2.0 - beta)));
    };
    double x_max = std::pow(
        0.5 * C * th2 * max_t / ((1.0 - beta) * cfg.abs_tol), 1.0 / (1.0 - beta));
    x_max = std::max(x_max, 1.0);
    while (upper_tail(x_max) > cfg.abs_tol) x_max *= 2.0;
    const double lower_mass =
        C * std::pow(x_min, beta + 1.0) / (beta + 1.0);
    const double upper_mass = upper_tail(x_max);
    x_max *= cfg.truncation_safety;

    // ---- inner error budget ------------------------------------------
    // |d exp(-I/2)/dI| <= 1/2, so an absolute error e on I moves the
    // outer integrand by at most C e / 2 at each x.
    const double x_measure =
        (std::pow(x_max, beta + 1.0) - std::pow(x_min, beta + 1.0)) /
        (beta + 1.0);
    inner_cfg.abs_tol =
        std::max(2.0 * cfg.abs_tol / (C * std::max(x_measure, 1.0)), 1e-300);

    auto inner_I = [&](double x) -> double {
        double a = 0.0;
        for (std::size_t j = 0; j < q.times.size(); ++j)
            a += q.thetas[j] * zbeta_kernel(x, q.times[j]);
        double value = a * a / (2.0 * x);  // exact integral over s < 0

        // each t_j carries a boundary layer of width ~1/x on its left;
        // geometric edges down to that scale keep the layer visible to
        // the panel error estimator at every x
        std::vector<double> bps{0.0};
        for (double t : q.times) {
            bps.push_back(t);
            for (double w = 0.5 * t; w * x > 0.125 && w > 1e-14 * t; w *= 0.5)
                bps.push_back(t - w);
        }

        IntegralEstimate part;
        try {
            part = integrate_adaptive(
                [&](double s) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < q.times.size(); ++j)
                        acc += q.thetas[j] * zbeta_kernel(x, q.times[j] - s);
                    return acc * acc;
                },
                0.0, max_t, bps, inner_cfg);
        } catch (const NonConvergenceError& e) {
            throw NonConvergenceError(e.what(), e.best_value, e.err_bound,
                                      "zbeta inner (s)");
        }
        return value + part.value;
    };

    const double y_min = std::log(x_min);
    const double y_max = std::log(x_max);
    const double y_bps[1] = {0.0};
    IntegralEstimate outer;
    try {
        outer = integrate_adaptive(
            [&](double y) {
                const double x = std::exp(y);
                return -C * std::expm1(-0.5 * inner_I(x)) *
                       std::exp(y * (beta + 1.0));
            },
            y_min, y_max, y_bps, cfg);
    } catch (const NonConvergenceError& e) {
        if (e.layer.empty())
            throw NonConvergenceError(e.what(), e.best_value, e.err_bound,
                                      "zbeta outer (x)");
        throw;
    }

    ExponentValue out;
    out.value = outer.value;
    // inner relative error propagates at most one-to-one into the
    // integrand; inner absolute error was budgeted to cfg.abs_tol.
    out.err_estimate = outer.err_estimate + inner_cfg.rel_tol * std::abs(outer.value) +
                       cfg.abs_tol + lower_mass + upper_mass;
    return out;
}

double wiener_exponent(const ExponentQuery& q) {
    q.validate();
    for (double t : q.times)
        if (t < 0.0)
            throw std::invalid_argument("wiener_exponent: times must be >= 0");
    double acc = 0.0;
    for (std::size_t j = 0; j < q.times.size(); ++j)
        for (std::size_t l = 0; l < q.times.size(); ++l)
            acc += std::min(q.times[j], q.times[l]) * q.thetas[j] * q.thetas[l];
    return 0.5 * acc;
}

double stable_levy_exponent(double hurst, double sigma,
                            const ExponentQuery& q) {
    q.validate();
    if (!(hurst >= 0.5))
        throw std::invalid_argument("stable_levy_exponent: hurst >= 1/2 required");
    if (!(sigma > 0.0))
        throw std::invalid_argument("stable_levy_exponent: sigma must be positive");
    double prev = 0.0;
    for (double t : q.times) {
        if (!(t > prev))
            throw std::invalid_argument(
                "stable_levy_exponent: times must be strictly ascending and positive");
        prev = t;
    }
    const double index = 1.0 / hurst;
    double value = 0.0;
    double suffix = 0.0;
    for (std::size_t j = q.thetas.size(); j-- > 0;) {
        suffix += q.thetas[j];
        const double t_prev = (j == 0) ? 0.0 : q.times[j - 1];
        value += (q.times[j] - t_prev) *
                 std::pow(std::abs(sigma * suffix), index);
    }
    return value;
}

}  // namespace dilastab
