#pragma once

// Composite Gauss-Legendre quadrature with panel doubling, specialised to the
// integrands sigma(y)^beta exp(-c sigma(y)) that appear in the stable density,
// the stable distribution function and the undershoot mixture weights.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "params.hpp"
#include "rng.hpp"
#include "zolotarev.hpp"

namespace subpass {

// Gauss-Legendre nodes per panel of the composite rule.
inline constexpr int kPanelNodes = 20;

struct QuadratureSpec {
    int max_nodes = 1 << 16;    // cap on nodes of the final composite rule
    double rel_tol = 1e-12;     // successive estimates must agree to this

    void validate() const
    {
        require(rel_tol > 0.0, "quadrature tolerance must be positive");
        require(max_nodes >= 3 * kPanelNodes, "quadrature cap below the initial node count");
    }
};

namespace detail {

template <int N>
struct GaussLegendre {
    std::array<double, N> x{};  // nodes on (-1,1)
    std::array<double, N> w{};

    GaussLegendre()
    {
        for (int i = 0; i < (N + 1) / 2; ++i) {
            double z = std::cos(kPi * (i + 0.75) / (N + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = z;
                for (int k = 2; k <= N; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N * (z * p1 - p0) / (z * z - 1.0);
                const double dz = p1 / dp;
                z -= dz;
                if (std::fabs(dz) < 1e-17) break;
            }
            x[i] = -z;
            x[N - 1 - i] = z;
            w[i] = w[N - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

inline const GaussLegendre<kPanelNodes>& panel_rule()
{
    static const GaussLegendre<kPanelNodes> rule;
    return rule;
}

// Sum of exp(logf - shift) * dx over a composite rule of `panels` panels on [a,b].
template <class LogF>
double composite_sum(const LogF& logf, double a, double b, int panels, double shift, WorkCounters* wc)
{
    const auto& g = panel_rule();
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double mid = lo + 0.5 * h, half = 0.5 * h;
        double s = 0.0;
        for (int i = 0; i < kPanelNodes; ++i) {
            const double x = mid + half * g.x[i];
            if (!(x > a && x < b)) continue;  // interior nodes only
            s += g.w[i] * std::exp(logf(x) - shift);
        }
        total += s * half;
    }
    if (wc) wc->quad_evals += static_cast<std::uint64_t>(kPanelNodes) * panels;
    return total;
}

}  // namespace detail

namespace detail {

struct Segment {
    double lo, hi;
    bool mirrored;   // integration variable is the complement 1 - y
};

// log of the sum over segments of the integral of exp(eval(seg, x)). Each
// segment is refined by doubling its panel count, worst first, until every
// segment's last two estimates agree to rel_tol relative to the total.
template <class Eval>
double log_integrate_segments(const Eval& eval, const std::vector<Segment>& segs, double shift,
                              const QuadratureSpec& spec, WorkCounters* wc)
{
    spec.validate();
    if (wc) ++wc->quad_calls;
    // exp(logf) carries relative rounding noise of order eps |logf| near the
    // peak; no tighter agreement between estimates can be certified.
    const double tol = std::max(spec.rel_tol, 64.0 * std::numeric_limits<double>::epsilon() * std::fabs(shift));
    const std::size_t nseg = segs.size();
    std::vector<int> panels(nseg, 1);
    std::vector<double> coarse(nseg, 0.0), fine(nseg, 0.0);
    const int per_panel = kPanelNodes;
    long nodes = 0;
    for (std::size_t i = 0; i < nseg; ++i) {
        if (!(segs[i].hi > segs[i].lo)) continue;
        auto f = [&](double x) { return eval(segs[i], x); };
        coarse[i] = composite_sum(f, segs[i].lo, segs[i].hi, 1, shift, wc);
        fine[i] = composite_sum(f, segs[i].lo, segs[i].hi, 2, shift, wc);
        panels[i] = 2;
        nodes += 3 * per_panel;
    }
    for (;;) {
        double total = 0.0;
        for (double f : fine) total += f;
        if (!std::isfinite(total)) throw NumericFailure("quadrature produced a non-finite value");
        std::size_t worst = nseg;
        double worst_err = tol * std::fabs(total);
        for (std::size_t i = 0; i < nseg; ++i) {
            const double err = std::fabs(fine[i] - coarse[i]);
            if (err > worst_err) {
                worst_err = err;
                worst = i;
            }
        }
        if (worst == nseg) return total > 0.0 ? std::log(total) + shift : -std::numeric_limits<double>::infinity();
        panels[worst] *= 2;
        nodes += static_cast<long>(panels[worst]) * per_panel;
        if (nodes > spec.max_nodes) throw NumericFailure("quadrature did not converge within the node cap");
        auto f = [&](double x) { return eval(segs[worst], x); };
        coarse[worst] = fine[worst];
        fine[worst] = composite_sum(f, segs[worst].lo, segs[worst].hi, panels[worst], shift, wc);
    }
}

}  // namespace detail

// log of the integral of exp(logf) over the union of consecutive segments
// [pts[i], pts[i+1]]. The integrand is scaled by exp(-shift) internally.
template <class LogF>
double log_integrate(const LogF& logf, const std::vector<double>& pts, double shift,
                     const QuadratureSpec& spec = {}, WorkCounters* wc = nullptr)
{
    std::vector<detail::Segment> segs;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) segs.push_back({pts[i], pts[i + 1], false});
    auto eval = [&](const detail::Segment&, double x) { return logf(x); };
    return detail::log_integrate_segments(eval, segs, shift, spec, wc);
}

// Integrand family sigma(y)^beta exp(-c (sigma(y) - sigma(0+))) on [0,1], c = exp(log_c).
// The factor exp(c sigma(0+)) keeps the integrand O(1) near 0 when c is huge;
// callers remove it where an absolute value is needed.
struct SigmaFamily {
    double alpha, beta, log_c;

    // y in [0,1) with yc = 1 - y.
    double log_value(double y, double yc) const
    {
        if (!(yc > 0.0)) return -std::numeric_limits<double>::infinity();
        if (y <= 0.0) return beta * log_sigma0(alpha);
        const double e = log_rho_excess(y, yc, alpha) / (1.0 - alpha);
        const double ls = log_sigma0(alpha) + e;
        if (!(e > 0.0)) return beta * ls;
        // log(sigma - sigma(0+)) = log sigma(0+) + log(expm1(e)), kept finite for large e.
        const double lex = log_sigma0(alpha) + (e > 30.0 ? e + std::log1p(-std::exp(-e)) : std::log(std::expm1(e)));
        return beta * ls - std::exp(log_c + lex);
    }

    double log_value(double y) const { return log_value(y, 1.0 - y); }

    // log of c sigma(0+), the removed factor.
    double log_offset() const { return log_c + log_sigma0(alpha); }

    // Mode on [0,1): sigma(mode) = beta / c when that exceeds sigma(0+), else 0.
    double mode() const
    {
        if (beta <= 0.0) return 0.0;
        const double target = std::log(beta) - log_c;
        if (target <= log_sigma0(alpha)) return 0.0;
        double lo = 0.0, hi = 1.0;
        for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (log_sigma(mid, alpha) < target ? lo : hi) = mid;
        }
        return lo;
    }

    // The mode as v = 1 - y when it lies above 1/2, else -1. Resolves modes
    // closer to 1 than the spacing of doubles there.
    double mode_complement() const
    {
        if (beta <= 0.0) return -1.0;
        const double target = std::log(beta) - log_c;
        if (target <= log_sigma(0.5, 0.5, alpha)) return -1.0;
        double lo = 0.0, hi = 0.5;   // log sigma(1 - v) decreases in v
        for (int i = 0; i < 2100; ++i) {
            const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
            if (mid <= lo || mid >= hi) break;
            (log_sigma(1.0 - mid, mid, alpha) > target ? lo : hi) = mid;
        }
        return hi;
    }
};

namespace detail {

// First point p between `from` and `end` with logf(p) < target, where logf
// decreases from x0 toward end and logf(from) >= target. Returns end when
// logf stays above target. Midpoints are geometric in the distance to x0 or to
// end when the bracket spans decades near either, so a drop squeezed against
// an endpoint is located to relative precision in its distance from it.
template <class LogF>
double drop_point(const LogF& logf, double x0, double end, double from, double target)
{
    if (logf(end) >= target) return end;
    double lo = from, hi = end;
    for (int it = 0; it < 4000; ++it) {
        const double dlo = std::fabs(lo - x0), dhi = std::fabs(hi - x0);
        const double glo = std::fabs(end - lo), ghi = std::fabs(end - hi);
        if (std::fabs(hi - lo) <= 0x1.0p-24 * std::min(dhi, glo)) break;
        const double dir = end > x0 ? 1.0 : -1.0;
        double mid;
        if (ghi < 0.25 * glo) {
            mid = end - dir * (ghi > 0.0 ? std::sqrt(glo * ghi) : glo / 16.0);
        } else if (dlo < 0.25 * dhi) {
            mid = x0 + dir * (dlo > 0.0 ? std::sqrt(dlo * dhi) : dhi / 16.0);
        } else {
            mid = 0.5 * (lo + hi);
        }
        if (mid == lo || mid == hi) break;
        (logf(mid) >= target ? lo : hi) = mid;
    }
    return hi;
}

inline constexpr std::array<double, 7> kDropLevels = {1.0, 4.0, 16.0, 64.0, 256.0, 800.0, 0.0};

}  // namespace detail

// Breakpoints adapted to a unimodal integrand on [a,b] with peak at `mode`:
// on each side, the points where logf has fallen by 1, 4, 16, 64, 256 and 800
// below its peak. Beyond the last level the integrand is negligible.
template <class LogF>
std::vector<double> unimodal_breakpoints(const LogF& logf, double a, double b, double mode)
{
    if (!(b > a)) return {a, b};
    const double m = std::clamp(mode, a, b);
    const double ref = logf(m);
    auto side = [&](double end) {
        std::vector<double> out;
        double p = m;
        bool reached_end = true;
        for (double drop : detail::kDropLevels) {
            if (drop == 0.0) {
                reached_end = false;
                break;
            }
            p = detail::drop_point(logf, m, end, p, ref - drop);
            if (p == end) break;
            out.push_back(p);
        }
        if (reached_end) out.push_back(end);
        return out;
    };
    std::vector<double> pts;
    if (m > a) {
        auto left = side(a);
        pts.assign(left.rbegin(), left.rend());
    }
    pts.push_back(m);
    if (b > m) {
        auto right = side(b);
        pts.insert(pts.end(), right.begin(), right.end());
    }
    return pts;
}

// log of the integral of sigma(y)^beta exp(-c (sigma(y) - sigma(0+))) over [a,b] within [0,1].
// Subtract exp(log_c) sigma(0+) to obtain the log of the unscaled integral.
// mode_hint, when >= 0, is the mode in y.
inline double log_sigma_integral(double alpha, double beta, double log_c, double a, double b,
                                 const QuadratureSpec& spec = {}, WorkCounters* wc = nullptr,
                                 double mode_hint = -1.0)
{
    if (!(b > a)) return -std::numeric_limits<double>::infinity();
    const SigmaFamily fam{alpha, beta, log_c};
    auto logf = [&](double y) { return fam.log_value(std::max(y, 0.0)); };
    auto logv = [&](double v) { return fam.log_value(1.0 - v, v); };
    const double mode = mode_hint >= 0.0 ? mode_hint : fam.mode();
    // A peak at 0 narrower than 1e-100 is below the resolution of the nodes:
    // sigma - sigma(0+) = sigma(0+) pi^2 alpha y^2 / 2 + O(y^4) gives the
    // Laplace value with relative error O(width^2).
    const double log_k = log_c + log_sigma0(alpha) + std::log(detail::kPi * detail::kPi * alpha / 2.0);
    if (mode == 0.0 && a == 0.0 && log_k > 460.0) {
        if (wc) ++wc->quad_calls;
        return beta * log_sigma0(alpha) + 0.5 * std::log(detail::kPi) - std::log(2.0) - 0.5 * log_k;
    }
    // The lower half is integrated in y, the upper half in the complement
    // v = 1 - y, so that points close to 1 are represented exactly.
    std::vector<detail::Segment> segs;
    // Away from the anchor the integrand can behave like a power of the
    // integration variable over many decades; geometric pieces of ratio 8 keep each smooth.
    auto push = [&](double lo, double hi, bool mirrored) {
        while (lo > 0.0 && hi > 8.0 * lo) {
            segs.push_back({lo, 8.0 * lo, mirrored});
            lo *= 8.0;
        }
        segs.push_back({lo, hi, mirrored});
    };
    double peak = -std::numeric_limits<double>::infinity();
    if (a < 0.5) {
        const double hi = std::min(b, 0.5);
        const double m = std::clamp(mode, a, hi);
        peak = std::max(peak, logf(m));
        const auto pts = unimodal_breakpoints(logf, a, hi, m);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) push(pts[i], pts[i + 1], false);
    }
    if (b > 0.5) {
        const double va = 1.0 - b, vb = 1.0 - std::max(a, 0.5);
        double vm = mode_hint >= 0.0 ? (mode > 0.5 ? 1.0 - mode : 0.5) : fam.mode_complement();
        if (vm < 0.0) vm = 0.5;
        const double m = std::clamp(vm, va, vb);
        peak = std::max(peak, logv(m));
        const auto pts = unimodal_breakpoints(logv, va, vb, m);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) push(pts[i], pts[i + 1], true);
    }
    auto eval = [&](const detail::Segment& sg, double x) { return sg.mirrored ? logv(x) : logf(x); };
    return detail::log_integrate_segments(eval, segs, peak, spec, wc);
}

// Density of S_1 for theta = 1 through the Zolotarev integral.
inline double phi_alpha(double x, double alpha, const QuadratureSpec& spec = {}, WorkCounters* wc = nullptr)
{
    require(x > 0.0, "phi_alpha requires x > 0");
    require(alpha > 0.0 && alpha < 1.0, "alpha in (0,1) required");
    const double r = alpha / (1.0 - alpha);
    const double lx = std::log(x);
    const SigmaFamily fam{alpha, 1.0, -r * lx};
    const double li = log_sigma_integral(alpha, 1.0, fam.log_c, 0.0, 1.0, spec, wc) - std::exp(fam.log_offset());
    return std::exp(std::log(r) - (r + 1.0) * lx + li);
}

// Density of S_t under the stable law.
inline double stable_density(double x, double t, const StableParams& p, const QuadratureSpec& spec = {},
                             WorkCounters* wc = nullptr)
{
    require(x > 0.0 && t > 0.0, "stable_density requires x > 0 and t > 0");
    const double scale = std::pow(p.theta * t, -1.0 / p.alpha);
    return phi_alpha(x * scale, p.alpha, spec, wc) * scale;
}

// Distribution function of S_t under the stable law.
inline double stable_cdf(double x, double t, const StableParams& p, const QuadratureSpec& spec = {},
                         WorkCounters* wc = nullptr)
{
    require(t > 0.0, "stable_cdf requires t > 0");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double r = p.r();
    const double lz = std::log(x) - std::log(p.theta * t) / p.alpha;
    const SigmaFamily fam{p.alpha, 0.0, -r * lz};
    const double li = log_sigma_integral(p.alpha, 0.0, fam.log_c, 0.0, 1.0, spec, wc) - std::exp(fam.log_offset());
    return std::min(1.0, std::exp(li));
}

struct MixtureWeight {
    double log_pprime;
    double p;
};

// log_i1, log_i2: logs of the two integrals, both scaled by the same exp(c sigma(0+)).
// log_s = log s, for scales beyond the double range.
inline MixtureWeight mixture_weight_from_log_scale(double log_s, double alpha, double log_i1, double log_i2)
{
    const double r = alpha / (1.0 - alpha);
    const double lp = -alpha * std::log(2.0 - std::pow(2.0, alpha)) - alpha * std::log(r) + alpha * r * log_s +
                      log_i1 - std::lgamma(1.0 - alpha) - log_i2;
    return {lp, 1.0 / (1.0 + std::exp(-lp))};
}

inline MixtureWeight mixture_weight_from_logs(double s, double alpha, double log_i1, double log_i2)
{
    return mixture_weight_from_log_scale(std::log(s), alpha, log_i1, log_i2);
}

// Mixture weight p' of the undershoot proposal and p = p'/(p'+1).
inline MixtureWeight mixture_weight_pprime(double s, double alpha, const QuadratureSpec& spec = {},
                                           WorkCounters* wc = nullptr)
{
    require(s > 0.0, "mixture weight requires s > 0");
    require(alpha > 0.0 && alpha < 1.0, "alpha in (0,1) required");
    const double r = alpha / (1.0 - alpha);
    const double log_c = -r * std::log(s);
    const double i1 = log_sigma_integral(alpha, 0.0, log_c, 0.0, 1.0, spec, wc);
    const double i2 = log_sigma_integral(alpha, alpha, log_c, 0.0, 1.0, spec, wc);
    return mixture_weight_from_logs(s, alpha, i1, i2);
}

struct RegionWeights {
    std::array<double, 3> log_w;   // log of W0, W1, W2 (-inf for empty ranges), common scale exp(c sigma(0+))

    std::array<double, 3> values() const
    {
        return {std::exp(log_w[0]), std::exp(log_w[1]), std::exp(log_w[2])};
    }
    double log_total() const
    {
        const double m = std::max({log_w[0], log_w[1], log_w[2]});
        if (!std::isfinite(m)) return m;
        return m + std::log(std::exp(log_w[0] - m) + std::exp(log_w[1] - m) + std::exp(log_w[2] - m));
    }
    std::array<double, 3> probabilities() const
    {
        const double lt = log_total();
        return {std::exp(log_w[0] - lt), std::exp(log_w[1] - lt), std::exp(log_w[2] - lt)};
    }
};

// Weights of sigma^alpha exp(-sigma s^-r) over [0,z*], [z*,z], [z,1].
inline RegionWeights psi2_region_weights_log_scale(double log_s, double alpha, double z, double z_star,
                                                   const QuadratureSpec& spec = {}, WorkCounters* wc = nullptr)
{
    require(!std::isnan(log_s) && std::isfinite(log_s), "region weights require s > 0");
    require(0.0 <= z_star && z_star <= z && z <= 1.0, "region weights require 0 <= z* <= z <= 1");
    const double r = alpha / (1.0 - alpha);
    const double log_c = -r * log_s;
    const double ninf = -std::numeric_limits<double>::infinity();
    RegionWeights w{{ninf, ninf, ninf}};
    // The integrand increases on [0,z] and decreases on [z,1].
    w.log_w[0] = log_sigma_integral(alpha, alpha, log_c, 0.0, z_star, spec, wc, z);
    w.log_w[1] = log_sigma_integral(alpha, alpha, log_c, z_star, z, spec, wc, z);
    w.log_w[2] = log_sigma_integral(alpha, alpha, log_c, z, 1.0, spec, wc, z);
    return w;
}

inline RegionWeights psi2_region_weights(double s, double alpha, double z, double z_star,
                                         const QuadratureSpec& spec = {}, WorkCounters* wc = nullptr)
{
    require(s > 0.0, "region weights require s > 0");
    return psi2_region_weights_log_scale(std::log(s), alpha, z, z_star, spec, wc);
}

}  // namespace subpass
