#pragma once

// Catalog of deterministic moving-average kernels f(t,u), each carrying
// the scaling law it claims, breakpoint hints and a certified power-law
// tail envelope for quadrature truncation.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dilastab/quadrature.hpp"

namespace dilastab {

struct ScalingLaw {
    double alpha = 0.0;
    double delta = 0.0;
};

enum class Support { WholeLine, PositiveHalfline };

/// Certified bound |f(t,u)| <= coeff * |u|^power for |u| >= min_radius.
/// coeff == 0 means f(t,.) vanishes outside |u| < min_radius.
struct TailEnvelope {
    double coeff = 0.0;
    double power = 0.0;
    double min_radius = 0.0;
};

class Kernel {
public:
    using EvalFn = std::function<double(double, double)>;
    using EnvelopeFn = std::function<TailEnvelope(double)>;
    using BreakpointsFn =
        std::function<std::vector<double>(std::span<const double>)>;

    Kernel(std::string name, std::map<std::string, double> params,
           std::optional<ScalingLaw> claimed_law, Support support,
           EvalFn eval, EnvelopeFn envelope, BreakpointsFn breakpoints = {});

    double operator()(double t, double u) const { return eval_(t, u); }

    const std::string& name() const { return name_; }
    const std::map<std::string, double>& params() const { return params_; }
    const std::optional<ScalingLaw>& claimed_law() const { return claimed_law_; }
    Support support() const { return support_; }

    /// u-values where f(.,u) is non-smooth for the given times,
    /// sorted and deduplicated.
    std::vector<double> breakpoints(std::span<const double> times) const;

    TailEnvelope tail_envelope(double t) const { return envelope_(t); }

private:
    std::string name_;
    std::map<std::string, double> params_;
    std::optional<ScalingLaw> claimed_law_;
    Support support_;
    EvalFn eval_;
    EnvelopeFn envelope_;
    BreakpointsFn breakpoints_;
};

// --- catalog ---------------------------------------------------------

/// Moving-average kernel of fractional Brownian/Levy motion,
/// c_H * [(t-u)_+^{H-1/2} - (-u)_+^{H-1/2}], normalized so the driving
/// noise with unit second moment gives Var = 1 at t = 1.  H in (1/2, 1);
/// claims law (H, 1).
Kernel fractional_ma(double H);

/// Symmetrized pair of moving-average kernels producing the
/// sub-fractional covariance.  H in (1/2, 1); claims law (H, 1).
Kernel sub_fractional(double H);

/// log|t-u| - log|u|; claims law (1/2, 1).
Kernel log_fractional();

/// (1 - e^{-ut}) u^{-(K+1)/2} on the positive halfline.  K in (0, 2);
/// claims law (K/2, -1).
Kernel sghir(double K);

/// |t-u|^{H-1/alpha} - |u|^{H-1/alpha}.  No claimed law: two distinct
/// laws hold and both are verified at the exponent level.  Requires
/// H in (0,1), stable_index in (0,2], H != 1/stable_index.
Kernel well_balanced(double H, double stable_index);

/// Indicator of (0, t]: recovers the plain driver, ties quadrature
/// oracles to the closed-form exponent.  Not part of the named catalog.
Kernel indicator_kernel();

/// Constructs a catalog kernel by name; throws std::invalid_argument for
/// unknown names or missing/out-of-range parameters.
Kernel make_kernel(const std::string& name,
                   const std::map<std::string, double>& params);

/// Unit-variance normalizer of the fractional moving-average kernel:
/// sqrt(Gamma(2H+1) sin(pi H)) / Gamma(H + 1/2).
double fbm_ma_normalizer(double H);

// --- operations ------------------------------------------------------

/// Auxiliary response kernel of the aggregated-AR(1) limit process:
/// (1 - e^{-xt})/x for x,t > 0, else 0 (no continuity fill-in at x=0).
double zbeta_kernel(double x, double t);

/// Max over n_samples random triples (t,u,T) of the guarded relative
/// deviation |f(t,u) - T^{alpha-delta/2} f(t/T, u/T^delta)| /
/// (|f(t,u)| + 1e-300).  t,u are standard normal (folded to |.| on a
/// positive halfline), T log-uniform on [0.1, 10]; fixed by the seed.
double check_kernel_scaling(const Kernel& kernel, const ScalingLaw& law,
                            std::size_t n_samples, std::uint64_t seed);

/// integral of f(t,u)^2 du over the kernel support, truncated where the
/// tail envelope certifies the remainder below cfg.abs_tol.
double l2_norm_sq(const Kernel& kernel, double t, const QuadratureConfig& cfg);

/// Envelope bound on integral of f(t,u)^2 over |u| > radius; used for
/// simulation truncation-bias reporting.  Throws std::invalid_argument
/// if radius < envelope min_radius (bound not certified there).
double l2_tail_bound(const Kernel& kernel, double t, double radius);

}  // namespace dilastab
