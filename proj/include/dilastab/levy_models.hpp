#pragma once

// Centered, finite-variance, pure-jump two-sided Levy drivers with
// closed-form characteristic exponents and exactly samplable jumps.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dilastab {

enum class JumpFamily {
    TwoPointSymmetric,  // jumps are +-a with probability 1/2 each
    LaplaceJumps        // jump sizes ~ Laplace(rate b)
};

struct Jump {
    double position;  // location of the jump in time
    double size;
};

/// A compound-Poisson driver: jump intensity `intensity` per unit time,
/// symmetric jump law selected by `family` with scale `jump_param`
/// (a for TwoPointSymmetric, rate b for LaplaceJumps).  Both families are
/// centered with finite second moment, so the driver is a martingale and
/// its exponent is real and nonnegative.
class LevyModel {
public:
    LevyModel(JumpFamily family, double intensity, double jump_param);

    JumpFamily family() const { return family_; }
    double intensity() const { return intensity_; }
    double jump_param() const { return jump_param_; }

    /// Characteristic exponent of the driver at time 1:
    /// TwoPointSymmetric: lambda*(1-cos(a*theta));
    /// LaplaceJumps:      lambda*(1 - b^2/(b^2+theta^2)).
    double exponent(double theta) const;

    /// Second moment of the jump measure: lambda*a^2 resp. 2*lambda/b^2.
    double second_moment() const;

    /// Exact multi-time exponent of the driver at ascending positive
    /// times: sum_j (t_j - t_{j-1}) * exponent(theta_j + ... + theta_k).
    /// Throws std::invalid_argument on non-ascending or non-positive times.
    double multi_time_exponent(std::span<const double> times,
                               std::span<const double> thetas) const;

    /// Poisson(intensity*(hi-lo)) many jumps on [lo,hi]: positions sorted
    /// ascending, sizes drawn afterwards in position order.  Fully
    /// determined by the seed.  Throws std::invalid_argument if hi <= lo.
    std::vector<Jump> sample_jumps(double lo, double hi,
                                   std::uint64_t seed) const;

    std::string family_name() const;

private:
    JumpFamily family_;
    double intensity_;
    double jump_param_;
};

/// Derives an independent per-path RNG seed from (seed, stream).  Used by
/// the Monte Carlo layer so that path p is reproducible regardless of how
/// work is split across threads.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace dilastab
