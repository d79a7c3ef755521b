#include "dilastab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace dilastab {

namespace {

// Gauss-Kronrod 7-15 nodes and weights (QUADPACK dqk15).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double err = 0.0;
};

// One GK15 evaluation on [a,b] with a QUADPACK-style error estimate.
// Non-finite samples mark the panel for unconditional splitting, which
// drives undeclared singularities toward panel edges.
Panel gk15(const std::function<double(double)>& fn, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);

    double fv[15];
    bool finite = true;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kXgk[i];
        fv[i] = fn(mid - dx);
        fv[14 - i] = fn(mid + dx);
        finite = finite && std::isfinite(fv[i]) && std::isfinite(fv[14 - i]);
    }
    fv[7] = fn(mid);
    finite = finite && std::isfinite(fv[7]);

    Panel p{a, b, 0.0, 0.0};
    if (!finite) {
        p.value = 0.0;
        p.err = std::numeric_limits<double>::max();
        return p;
    }

    double resk = 0.0, resabs = 0.0;
    for (int i = 0; i < 7; ++i) {
        resk += kWgk[i] * (fv[i] + fv[14 - i]);
        resabs += kWgk[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
    }
    resk += kWgk[7] * fv[7];
    resabs += kWgk[7] * std::abs(fv[7]);

    double resg = kWg[3] * fv[7];
    for (int i = 0; i < 3; ++i)
        resg += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);

    const double reskh = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fv[7] - reskh);
    for (int i = 0; i < 7; ++i)
        resasc += kWgk[i] *
                  (std::abs(fv[i] - reskh) + std::abs(fv[14 - i] - reskh));

    p.value = resk * half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    const double uflow = std::numeric_limits<double>::min();
    if (resabs > uflow / (50.0 * eps)) err = std::max(eps * 50.0 * resabs, err);
    p.err = err;
    return p;
}

// Initial panel edges: breakpoints inside [lo,hi], plus geometric
// subdivision of long outer segments anchored at the end nearer zero.
std::vector<double> initial_edges(double lo, double hi,
                                  std::span<const double> breakpoints) {
    std::vector<double> edges{lo, hi};
    for (double bp : breakpoints)
        if (bp > lo && bp < hi) edges.push_back(bp);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    // octave-wide tail panels: GK15 resolves power laws over a 2x range
    // to near machine precision, so long tails converge without splits
    constexpr double kGrowth = 2.0;
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double a = edges[i], b = edges[i + 1];
        out.push_back(a);
        const bool anchor_left = std::abs(a) <= std::abs(b);
        const double c = anchor_left ? a : b;
        double step = std::abs(c) + 1.0;
        if (b - a > kGrowth * step) {
            std::vector<double> pts;
            while (step < (b - a) / kGrowth) {
                step *= kGrowth;
                pts.push_back(anchor_left ? a + step : b - step);
            }
            if (!anchor_left) std::reverse(pts.begin(), pts.end());
            out.insert(out.end(), pts.begin(), pts.end());
        }
    }
    out.push_back(edges.back());
    return out;
}

struct PanelOrder {
    bool operator()(const Panel& x, const Panel& y) const {
        if (x.err != y.err) return x.err < y.err;
        return x.a > y.a;  // deterministic tie-break
    }
};

}  // namespace

void QuadratureConfig::validate() const {
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw std::invalid_argument("QuadratureConfig: rel_tol in (0,1) required");
    if (!(abs_tol > 0.0))
        throw std::invalid_argument("QuadratureConfig: abs_tol must be positive");
    if (max_subdivisions == 0)
        throw std::invalid_argument("QuadratureConfig: max_subdivisions must be positive");
    if (!(truncation_safety > 0.0))
        throw std::invalid_argument("QuadratureConfig: truncation_safety must be positive");
}

IntegralEstimate integrate_adaptive(const std::function<double(double)>& fn,
                                    double lo, double hi,
                                    std::span<const double> breakpoints,
                                    const QuadratureConfig& cfg) {
    cfg.validate();
    if (!(hi > lo))
        throw std::invalid_argument("integrate_adaptive: hi must exceed lo");

    std::priority_queue<Panel, std::vector<Panel>, PanelOrder> heap;
    const auto edges = initial_edges(lo, hi, breakpoints);

    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Panel p = gk15(fn, edges[i], edges[i + 1]);
        total += p.value;
        total_err += p.err;
        heap.push(p);
    }

    std::size_t splits = 0;
    auto target = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)); };

    while (total_err > target()) {
        if (splits >= cfg.max_subdivisions || heap.empty())
            throw NonConvergenceError(
                "integrate_adaptive: subdivision budget exhausted", total,
                total_err);
        Panel worst = heap.top();
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        if (!(m > worst.a && m < worst.b)) {
            // panel narrower than machine precision; keep its estimate
            // (err may be max() from a non-finite sample => give up)
            if (worst.err == std::numeric_limits<double>::max())
                throw NonConvergenceError(
                    "integrate_adaptive: non-finite integrand at machine-width panel",
                    total, total_err);
            continue;
        }
        Panel left = gk15(fn, worst.a, m);
        Panel right = gk15(fn, m, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        ++splits;
    }

    // Re-sum panels in interval order for a scheduling-independent result.
    std::vector<Panel> panels;
    panels.reserve(heap.size());
    while (!heap.empty()) {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });
    IntegralEstimate out;
    for (const Panel& p : panels) {
        out.value += p.value;
        out.err_estimate += p.err;
    }
    out.subdivisions = splits;
    return out;
}

double power_tail_mass(double coeff, double power, double radius,
                       bool two_sided) {
    if (!(power < -1.0))
        throw DivergenceError("power_tail_mass: tail exponent must be < -1");
    if (coeff == 0.0) return 0.0;
    if (!(radius > 0.0))
        throw std::invalid_argument("power_tail_mass: radius must be positive");
    const double one_side =
        coeff * std::pow(radius, power + 1.0) / (-(power + 1.0));
    return two_sided ? 2.0 * one_side : one_side;
}

double power_tail_radius(double coeff, double power, double target,
                         bool two_sided) {
    if (!(power < -1.0))
        throw DivergenceError("power_tail_radius: tail exponent must be < -1");
    if (!(target > 0.0))
        throw std::invalid_argument("power_tail_radius: target must be positive");
    if (coeff == 0.0) return 0.0;
    const double sides = two_sided ? 2.0 : 1.0;
    // sides * coeff * R^{power+1} / (-(power+1)) = target
    return std::pow(target * (-(power + 1.0)) / (sides * coeff),
                    1.0 / (power + 1.0));
}

}  // namespace dilastab
