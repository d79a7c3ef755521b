#include "dilastab/levy_models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dilastab {

namespace {

// Raw mt19937_64 output mapped to [0,1).  The generator's output sequence
// is pinned by the standard, so samples are reproducible across platforms.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Knuth's multiplication method, chunked so exp(-mean) never underflows.
std::size_t poisson_count(std::mt19937_64& rng, double mean) {
    std::size_t total = 0;
    while (mean > 0.0) {
        const double chunk = std::min(mean, 256.0);
        mean -= chunk;
        const double limit = std::exp(-chunk);
        double prod = uniform01(rng);
        while (prod >= limit) {
            ++total;
            prod *= uniform01(rng);
        }
    }
    return total;
}

inline double laplace_draw(std::mt19937_64& rng, double rate) {
    const double u = uniform01(rng) - 0.5;
    // inverse CDF; u == +-0.5 cannot occur since uniform01 < 1
    return (u < 0.0 ? std::log1p(2.0 * u) : -std::log1p(-2.0 * u)) / rate;
}

}  // namespace

LevyModel::LevyModel(JumpFamily family, double intensity, double jump_param)
    : family_(family), intensity_(intensity), jump_param_(jump_param) {
    if (!(intensity > 0.0) || !std::isfinite(intensity))
        throw std::invalid_argument("LevyModel: intensity must be positive");
    if (!(jump_param > 0.0) || !std::isfinite(jump_param))
        throw std::invalid_argument("LevyModel: jump_param must be positive");
}

double LevyModel::exponent(double theta) const {
    switch (family_) {
        case JumpFamily::TwoPointSymmetric: {
            // 1 - cos(a theta), written to keep full precision for the
            // tiny arguments the quadrature tails produce
            const double s = std::sin(0.5 * jump_param_ * theta);
            return intensity_ * 2.0 * s * s;
        }
        case JumpFamily::LaplaceJumps: {
            const double b2 = jump_param_ * jump_param_;
            return intensity_ * theta * theta / (b2 + theta * theta);
        }
    }
    return 0.0;  // unreachable
}

double LevyModel::second_moment() const {
    switch (family_) {
        case JumpFamily::TwoPointSymmetric:
            return intensity_ * jump_param_ * jump_param_;
        case JumpFamily::LaplaceJumps:
            return 2.0 * intensity_ / (jump_param_ * jump_param_);
    }
    return 0.0;  // unreachable
}

double LevyModel::multi_time_exponent(std::span<const double> times,
                                      std::span<const double> thetas) const {
    if (times.empty() || times.size() != thetas.size())
        throw std::invalid_argument(
            "multi_time_exponent: times/thetas must be nonempty and match");
    double prev = 0.0;
    for (double t : times) {
        if (!(t > prev))
            throw std::invalid_argument(
                "multi_time_exponent: times must be strictly ascending and positive");
        prev = t;
    }
    // theta_j + ... + theta_k multiplies the increment on (t_{j-1}, t_j]
    double value = 0.0;
    double suffix = 0.0;
    for (std::size_t j = thetas.size(); j-- > 0;) {
        suffix += thetas[j];
        const double t_prev = (j == 0) ? 0.0 : times[j - 1];
        value += (times[j] - t_prev) * exponent(suffix);
    }
    return value;
}

std::vector<Jump> LevyModel::sample_jumps(double lo, double hi,
                                          std::uint64_t seed) const {
    if (!(hi > lo))
        throw std::invalid_argument("sample_jumps: window must have hi > lo");
    std::mt19937_64 rng(seed);

    // Draw order is fixed (count, sorted positions, then sizes) so a seed
    // pins the exact jump configuration.
    const std::size_t n = poisson_count(rng, intensity_ * (hi - lo));
    std::vector<Jump> jumps(n);
    for (auto& j : jumps) j.position = lo + (hi - lo) * uniform01(rng);
    std::sort(jumps.begin(), jumps.end(),
              [](const Jump& a, const Jump& b) { return a.position < b.position; });
    for (auto& j : jumps) {
        switch (family_) {
            case JumpFamily::TwoPointSymmetric:
                j.size = (rng() & 1u) ? jump_param_ : -jump_param_;
                break;
            case JumpFamily::LaplaceJumps:
                j.size = laplace_draw(rng, jump_param_);
                break;
        }
    }
    return jumps;
}

std::string LevyModel::family_name() const {
    return family_ == JumpFamily::TwoPointSymmetric ? "two_point" : "laplace";
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over the combined state; two rounds decorrelate adjacent
    // streams well beyond what the ensemble statistics can resolve.
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    for (int round = 0; round < 2; ++round) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        x ^= x >> 31;
    }
    return x;
}

}  // namespace dilastab
