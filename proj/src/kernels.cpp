#include "dilastab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dilastab {

namespace {

// (b + d)^p - b^p for b > 0 with the increment d supplied exactly by the
// caller: far out in the tails fl(b + d) == b, so forming the difference
// from rounded arguments would silently return 0 and drop the whole tail.
double pow_diff_exact(double b, double d, double p) {
    if (d == 0.0) return 0.0;
    if (b + d <= 0.0) return -std::pow(b, p);  // truncated-power case
    return std::pow(b, p) * std::expm1(p * std::log1p(d / b));
}

std::vector<double> default_breakpoints(std::span<const double> times,
                                        bool with_negated) {
    std::vector<double> bps{0.0};
    for (double t : times) {
        bps.push_back(t);
        if (with_negated) bps.push_back(-t);
    }
    return bps;
}

double require_in(double x, double lo, double hi, const char* what) {
    if (!(x > lo && x < hi))
        throw std::invalid_argument(std::string(what) + " out of range");
    return x;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double normal_draw(std::mt19937_64& rng) {
    // Box-Muller on the raw generator stream keeps samples portable.
    double u1 = uniform01(rng);
    while (u1 == 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

}  // namespace

Kernel::Kernel(std::string name, std::map<std::string, double> params,
               std::optional<ScalingLaw> claimed_law, Support support,
               EvalFn eval, EnvelopeFn envelope, BreakpointsFn breakpoints)
    : name_(std::move(name)),
      params_(std::move(params)),
      claimed_law_(claimed_law),
      support_(support),
      eval_(std::move(eval)),
      envelope_(std::move(envelope)),
      breakpoints_(std::move(breakpoints)) {}

std::vector<double> Kernel::breakpoints(std::span<const double> times) const {
    std::vector<double> bps = breakpoints_
                                  ? breakpoints_(times)
                                  : default_breakpoints(times, false);
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    return bps;
}

double fbm_ma_normalizer(double H) {
    return std::sqrt(std::tgamma(2.0 * H + 1.0) *
                     std::sin(3.141592653589793238462643383279502884 * H)) /
           std::tgamma(H + 0.5);
}

Kernel fractional_ma(double H) {
    require_in(H, 0.5, 1.0, "fractional_ma: H");
    const double c = fbm_ma_normalizer(H);
    const double p = H - 0.5;
    auto eval = [c, p](double t, double u) -> double {
        if (u == 0.0 || u == t) return 0.0;
        if (u < 0.0) return c * pow_diff_exact(-u, t, p);
        return t - u > 0.0 ? c * std::pow(t - u, p) : 0.0;
    };
    auto envelope = [c, p, H](double t) -> TailEnvelope {
        if (t == 0.0) return {0.0, 0.0, 0.0};
        const double spread = t >= 0.0 ? 1.0 : std::pow(2.0, 1.5 - H);
        return {c * p * std::abs(t) * spread, H - 1.5, 2.0 * std::abs(t)};
    };
    return Kernel("fractional_ma", {{"H", H}}, ScalingLaw{H, 1.0},
                  Support::WholeLine, eval, envelope);
}

Kernel sub_fractional(double H) {
    require_in(H, 0.5, 1.0, "sub_fractional: H");
    const double c = fbm_ma_normalizer(H) / std::sqrt(2.0);
    const double p = H - 0.5;
    // Even in t; the two moving-average brackets cancel to first order in
    // the left tail, so the far field is a second difference of x^p.
    auto eval = [c, p](double t, double u) -> double {
        const double s = std::abs(t);
        if (s == 0.0 || u == 0.0) return 0.0;
        const double v = -u;
        if (v > s)
            return c * std::pow(v, p) *
                   (std::expm1(p * std::log1p(s / v)) +
                    std::expm1(p * std::log1p(-s / v)));
        if (v > 0.0)  // 0 < v <= s: the (v-s)_+ term is gone
            return c * (std::pow(s + v, p) - 2.0 * std::pow(v, p));
        if (u < s)  // 0 < u < s
            return c * std::pow(s - u, p);
        return 0.0;
    };
    auto envelope = [c, p, H](double t) -> TailEnvelope {
        const double s = std::abs(t);
        if (s == 0.0) return {0.0, 0.0, 0.0};
        const double coeff =
            c * p * (1.5 - H) * std::pow(2.0, 2.5 - H) * s * s;
        return {coeff, H - 2.5, 2.0 * s};
    };
    auto bps = [](std::span<const double> times) {
        return default_breakpoints(times, true);
    };
    return Kernel("sub_fractional", {{"H", H}}, ScalingLaw{H, 1.0},
                  Support::WholeLine, eval, envelope, bps);
}

Kernel log_fractional() {
    auto eval = [](double t, double u) -> double {
        if (u == 0.0 || u == t) return 0.0;
        const double x = t / u;
        if (std::abs(x) <= 0.5) return std::log1p(-x);
        return std::log(std::abs(t - u)) - std::log(std::abs(u));
    };
    auto envelope = [](double t) -> TailEnvelope {
        if (t == 0.0) return {0.0, 0.0, 0.0};
        return {2.0 * std::abs(t), -1.0, 2.0 * std::abs(t)};
    };
    return Kernel("log_fractional", {}, ScalingLaw{0.5, 1.0},
                  Support::WholeLine, eval, envelope);
}

Kernel sghir(double K) {
    require_in(K, 0.0, 2.0, "sghir: K");
    const double q = -(K + 1.0) / 2.0;
    auto eval = [q](double t, double u) -> double {
        if (t > 0.0 && u > 0.0) return -std::expm1(-u * t) * std::pow(u, q);
        return 0.0;
    };
    auto envelope = [q](double t) -> TailEnvelope {
        if (!(t > 0.0)) return {0.0, 0.0, 0.0};
        return {1.0, q, 0.0};  // (1-e^{-ut}) <= 1 for every u > 0
    };
    auto bps = [](std::span<const double>) { return std::vector<double>{0.0}; };
    return Kernel("sghir", {{"K", K}}, ScalingLaw{K / 2.0, -1.0},
                  Support::PositiveHalfline, eval, envelope, bps);
}

Kernel well_balanced(double H, double stable_index) {
    require_in(H, 0.0, 1.0, "well_balanced: H");
    if (!(stable_index > 0.0 && stable_index <= 2.0))
        throw std::invalid_argument("well_balanced: stable_index out of range");
    const double p = H - 1.0 / stable_index;
    if (p == 0.0)
        throw std::invalid_argument("well_balanced: H = 1/stable_index excluded");
    auto eval = [p](double t, double u) -> double {
        if (u == 0.0 || u == t) return 0.0;
        if (u < 0.0) {
            const double v = -u;
            if (t + v > 0.0) return pow_diff_exact(v, t, p);
            return std::pow(-(t + v), p) - std::pow(v, p);  // t < -v < 0
        }
        if (u > t) return pow_diff_exact(u, -t, p);
        return std::pow(t - u, p) - std::pow(u, p);  // 0 < u < t
    };
    auto envelope = [p](double t) -> TailEnvelope {
        if (t == 0.0) return {0.0, 0.0, 0.0};
        const double coeff =
            std::abs(p) * std::abs(t) * std::pow(2.0, 1.0 - p);
        return {coeff, p - 1.0, 2.0 * std::abs(t)};
    };
    return Kernel("well_balanced", {{"H", H}, {"stable_index", stable_index}},
                  std::nullopt, Support::WholeLine, eval, envelope);
}

Kernel indicator_kernel() {
    auto eval = [](double t, double u) -> double {
        if (t >= 0.0) return (u > 0.0 && u <= t) ? 1.0 : 0.0;
        return (u > t && u <= 0.0) ? -1.0 : 0.0;
    };
    auto envelope = [](double t) -> TailEnvelope {
        return {0.0, 0.0, std::abs(t)};
    };
    return Kernel("indicator", {}, std::nullopt, Support::WholeLine, eval,
                  envelope);
}

Kernel make_kernel(const std::string& name,
                   const std::map<std::string, double>& params) {
    auto get = [&](const char* key) {
        auto it = params.find(key);
        if (it == params.end())
            throw std::invalid_argument("kernel '" + name +
                                        "' missing parameter '" + key + "'");
        return it->second;
    };
    if (name == "fractional_ma") return fractional_ma(get("H"));
    if (name == "sub_fractional") return sub_fractional(get("H"));
    if (name == "log_fractional") return log_fractional();
    if (name == "sghir") return sghir(get("K"));
    if (name == "well_balanced")
        return well_balanced(get("H"), get("stable_index"));
    throw std::invalid_argument("unknown kernel name '" + name + "'");
}

double zbeta_kernel(double x, double t) {
    if (x > 0.0 && t > 0.0) return -std::expm1(-x * t) / x;
    return 0.0;
}

double check_kernel_scaling(const Kernel& kernel, const ScalingLaw& law,
                            std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1)
        throw std::invalid_argument("check_kernel_scaling: n_samples >= 1");
    std::mt19937_64 rng(seed);
    const bool halfline = kernel.support() == Support::PositiveHalfline;
    const double theta_exp = law.alpha - 0.5 * law.delta;

    double worst = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        double t = normal_draw(rng);
        double u = normal_draw(rng);
        if (halfline) {
            t = std::abs(t);
            u = std::abs(u);
        }
        const double T =
            std::exp(std::log(0.1) + uniform01(rng) * std::log(100.0));
        const double lhs = kernel(t, u);
        const double rhs = std::pow(T, theta_exp) *
                           kernel(t / T, u / std::pow(T, law.delta));
        const double dev = std::abs(lhs - rhs) / (std::abs(lhs) + 1e-300);
        worst = std::max(worst, dev);
    }
    return worst;
}

double l2_norm_sq(const Kernel& kernel, double t, const QuadratureConfig& cfg) {
    cfg.validate();
    const TailEnvelope env = kernel.tail_envelope(t);
    const bool two_sided = kernel.support() == Support::WholeLine;

    double radius;
    if (env.coeff == 0.0) {
        radius = std::max({env.min_radius, std::abs(t), 1.0});
    } else {
        radius = power_tail_radius(env.coeff * env.coeff, 2.0 * env.power,
                                   cfg.abs_tol, two_sided);
        radius = std::max(radius * cfg.truncation_safety,
                          std::max({env.min_radius, 2.0 * std::abs(t), 1.0}));
        if (!std::isfinite(radius))
            throw DivergenceError(
                "l2_norm_sq: truncation radius for the requested abs_tol "
                "exceeds floating-point range (tail decays too slowly)");
    }

    const double times[1] = {t};
    auto bps = kernel.breakpoints(times);
    const double lo = two_sided ? -radius : 0.0;
    auto result = integrate_adaptive(
        [&](double u) {
            const double f = kernel(t, u);
            return f * f;
        },
        lo, radius, bps, cfg);
    return result.value;
}

double l2_tail_bound(const Kernel& kernel, double t, double radius) {
    const TailEnvelope env = kernel.tail_envelope(t);
    if (env.coeff == 0.0) return 0.0;
    if (radius < env.min_radius)
        throw std::invalid_argument(
            "l2_tail_bound: radius below the certified envelope region");
    return power_tail_mass(env.coeff * env.coeff, 2.0 * env.power, radius,
                           kernel.support() == Support::WholeLine);
}

}  // namespace dilastab
