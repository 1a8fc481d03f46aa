#pragma once

// Statistical validation: two-sample Kolmogorov-Smirnov, stable quantiles, a
// reference sampler for the proposal y-marginals by Householder-4 inversion of
// the quadrature CDF, and a deterministic suite of grid inequalities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "params.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "rootfind.hpp"
#include "undershoot.hpp"
#include "zolotarev.hpp"

namespace subpass {

// ---------------------------------------------------------------- KS

struct KsResult {
    double statistic = 0.0;   // sup |F_n - G_m|
    double p_value = 1.0;     // asymptotic Kolmogorov tail
    std::size_t n = 0, m = 0;

    bool passes(double level) const { return p_value > level; }
};

// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_tail(double lambda)
{
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;   // the tail is 1 to double precision here
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? term : -term);
        if (term < 1e-18 * sum) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline KsResult ks_two_sample(std::vector<double> xs, std::vector<double> ys)
{
    require(!xs.empty() && !ys.empty(), "ks_two_sample requires two nonempty samples");
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const double n = static_cast<double>(xs.size()), m = static_cast<double>(ys.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < xs.size() && j < ys.size()) {
        const double v = std::min(xs[i], ys[j]);
        while (i < xs.size() && xs[i] == v) ++i;
        while (j < ys.size() && ys[j] == v) ++j;
        d = std::max(d, std::fabs(i / n - j / m));
    }
    KsResult r;
    r.statistic = d;
    r.n = xs.size();
    r.m = ys.size();
    const double ne = n * m / (n + m);
    const double rn = std::sqrt(ne);
    r.p_value = kolmogorov_tail((rn + 0.12 + 0.11 / rn) * d);
    return r;
}

// ---------------------------------------------------------------- quantiles

// q-quantile of S_1 under theta = 1, by bracketing in log x.
inline double stable_quantile(double q, double alpha)
{
    require(q > 0.0 && q < 1.0, "stable_quantile requires q in (0,1)");
    const StableParams p(alpha, 1.0);
    auto f = [&](double lx) { return stable_cdf(std::exp(lx), 1.0, p) - q; };
    double lo = -1.0, hi = 1.0;
    while (f(lo) > 0.0) lo *= 2.0;
    while (f(hi) < 0.0) hi *= 2.0;
    std::uintmax_t it = 200;
    const auto br = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), it);
    return std::exp(0.5 * (br.first + br.second));
}

// ---------------------------------------------------------------- reference sampler

// Reference sampler for the y-marginal of the first (beta = 0) or second
// (beta = alpha) proposal, density proportional to sigma^beta exp(-sigma s^-r).
// The CDF is tabulated at fixed nodes by quadrature; within the bracketing
// cell it is one more integral, inverted by Householder's method of order 4.
class DirectPsiSampler {
public:
    DirectPsiSampler(int which, const UndershootContext& ctx, const Precision& prec = {},
                     const QuadratureSpec& spec = {})
        : alpha_(ctx.alpha), log_c_(ctx.log_c), prec_(prec), spec_(spec)
    {
        require(which == 1 || which == 2, "proposal index must be 1 or 2");
        beta_ = which == 1 ? 0.0 : alpha_;
        for (int i = 0; i <= 32; ++i) nodes_.push_back(i / 64.0);
        for (int k = 2; k <= 52; ++k) nodes_.push_back(1.0 - std::ldexp(1.0, -k));
        nodes_.push_back(1.0);
        mode_ = SigmaFamily{alpha_, beta_, log_c_}.mode();
        const double m = mode_;
        cum_.assign(nodes_.size(), 0.0);
        std::vector<double> cell(nodes_.size() - 1);
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
            cell[i] = log_sigma_integral(alpha_, beta_, log_c_, nodes_[i], nodes_[i + 1], spec_, nullptr, m);
            top = std::max(top, cell[i]);
        }
        log_scale_ = top;
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) cum_[i + 1] = cum_[i] + std::exp(cell[i] - top);
        total_ = cum_.back();
    }

    double sample(RngStream& rng, WorkCounters* wc = nullptr) const { return invert(rng.uniform(), wc); }

    // y with F(y) = u.
    double invert(double u, WorkCounters* wc = nullptr) const
    {
        const double target = u * total_;
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
        std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cum_.begin() - 1, 0));
        k = std::min(k, nodes_.size() - 2);
        const double lo = nodes_[k], hi = nodes_[k + 1];
        const double frac = (target - cum_[k]) / (cum_[k + 1] - cum_[k]);
        const double x0 = lo + std::clamp(frac, 0.0, 1.0) * (hi - lo);
        const double m = mode_;
        auto eval = [&](double y) {
            Derivs4 d{};
            const double part = y > lo ? std::exp(log_sigma_integral(alpha_, beta_, log_c_, lo, y, spec_, wc, m) -
                                                  log_scale_)
                                       : 0.0;
            d.f = (cum_[k] + part - target) / total_;
            if (y <= 0.0 || y >= 1.0) {
                d.d1 = d.d2 = d.d3 = d.d4 = 0.0;
                return d;
            }
            const double g = log_density(y);
            const double l1 = dlog_sigma(y, alpha_, 1), l2 = dlog_sigma(y, alpha_, 2), l3 = dlog_sigma(y, alpha_, 3);
            const double c = std::exp(log_c_);
            const double sg = std::exp(detail::log_sigma_at(y, alpha_));
            const double s1 = sg * l1, s2 = sg * (l2 + l1 * l1), s3 = sg * (l3 + 3.0 * l1 * l2 + l1 * l1 * l1);
            const double g1 = beta_ * l1 - c * s1, g2 = beta_ * l2 - c * s2, g3 = beta_ * l3 - c * s3;
            const double f = std::exp(g - log_scale_) / total_;
            d.d1 = f;
            d.d2 = f * g1;
            d.d3 = f * (g2 + g1 * g1);
            d.d4 = f * (g3 + 3.0 * g1 * g2 + g1 * g1 * g1);
            return d;
        };
        const RootResult res = householder4_invert(eval, x0, lo, hi, prec_, wc);
        return res.root;
    }

    // log of the unnormalised density in the scaled form used by the integrals.
    double log_density(double y) const
    {
        const SigmaFamily fam{alpha_, beta_, log_c_};
        return fam.log_value(y, 1.0 - y);
    }

private:
    double alpha_, beta_ = 0.0, log_c_, mode_ = 0.0;
    Precision prec_;
    QuadratureSpec spec_;
    std::vector<double> nodes_, cum_;
    double log_scale_ = 0.0, total_ = 0.0;
};

// ---------------------------------------------------------------- proposal KS suite

struct KsReportRow {
    std::string test;
    KsResult result;
};

// Two-sample KS between the y-marginals of both proposals and the reference
// sampler, at s equal to the median and the 99th percentile of S_1.
// Stream ids are fixed per (alpha, s, proposal), so the report is reproducible.
inline std::vector<KsReportRow> proposal_ks_suite(const std::vector<double>& alphas, std::size_t n,
                                                  std::uint64_t seed)
{
    require(n >= 1, "KS suite requires n >= 1");
    std::vector<KsReportRow> out;
    std::uint64_t id = 0;
    for (double a : alphas) {
        for (double quantile : {0.5, 0.99}) {
            const double s = stable_quantile(quantile, a);
            const UndershootContext ctx(s, a);
            for (int which = 1; which <= 2; ++which) {
                RngStream main(seed, 2 * id), ref(seed, 2 * id + 1);
                ++id;
                const DirectPsiSampler direct(which, ctx);
                std::vector<double> xs(n), ys(n);
                for (auto& y : xs) y = which == 1 ? sample_psi1(ctx, main).y : sample_psi2(ctx, main).y;
                for (auto& y : ys) y = direct.sample(ref);
                std::ostringstream name;
                name << "psi" << which << " alpha=" << a << " s=q" << quantile;
                out.push_back({name.str(), ks_two_sample(xs, ys)});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------- invariant suite

struct InvariantCheck {
    std::string name;
    bool passed = true;
    double worst = 0.0;   // worst observed value of the checked quantity
    double bound = 0.0;   // the bound it is compared with
    std::size_t points = 0;
};

struct InvariantReport {
    std::vector<InvariantCheck> checks;

    bool all_passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.passed; });
    }

    std::string text() const
    {
        std::ostringstream os;
        os.precision(10);
        for (const auto& c : checks)
            os << (c.passed ? "PASS " : "FAIL ") << c.name << " worst=" << c.worst << " bound=" << c.bound
               << " points=" << c.points << "\n";
        return os.str();
    }
};

namespace checks {

using LogSigmaFn = std::function<double(double u, double alpha)>;

inline std::vector<double> unit_grid(int n)
{
    std::vector<double> g;
    for (int i = 1; i <= n; ++i) g.push_back(static_cast<double>(i) / (n + 1));
    return g;
}

// Centered finite differences of orders 1-3 of log sigma are positive.
inline InvariantCheck log_sigma_derivatives(const LogSigmaFn& ls, const std::vector<double>& alphas, int n = 1000)
{
    InvariantCheck c{"log-sigma derivatives of orders 1-3 positive", true, std::numeric_limits<double>::infinity(),
                     0.0, 0};
    const double h = 1e-3;
    for (double a : alphas) {
        for (double u : unit_grid(n)) {
            const double x = 3.0 * h + u * (1.0 - 6.0 * h);   // keeps the stencil inside (0,1)
            const double fm2 = ls(x - 2 * h, a), fm = ls(x - h, a), f0 = ls(x, a), fp = ls(x + h, a),
                         fp2 = ls(x + 2 * h, a);
            const double d1 = (fp - fm) / (2 * h);
            const double d2 = (fp - 2 * f0 + fm) / (h * h);
            const double d3 = (fp2 - 2 * fp + 2 * fm - fm2) / (2 * h * h * h);
            // Scale-aware floor: rounding in the third difference is ~eps |f| / h^3.
            const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::fabs(f0) / (h * h * h);
            const double worst = std::min({d1, d2, d3 + noise});
            c.worst = std::min(c.worst, std::min({d1, d2, d3}));
            ++c.points;
            if (!(worst > 0.0)) c.passed = false;
        }
    }
    return c;
}

// 0 <= sigma(x) - sigma(0+) <= (pi - 2/e)(1 - alpha) x on (0, 1/2).
inline InvariantCheck sigma_linear_bound(const std::vector<double>& alphas, int n = 1000)
{
    InvariantCheck c{"sigma(x) - sigma(0+) within [0, (pi - 2/e)(1 - alpha) x] on (0,1/2)", true,
                     -std::numeric_limits<double>::infinity(), 1.0, 0};
    for (double a : alphas)
        for (double u : unit_grid(n)) {
            const double x = 0.5 * u;
            const double ex = sigma_excess(x, a);
            const double bound = (detail::kPi - 2.0 / std::exp(1.0)) * (1.0 - a) * x;
            c.worst = std::max(c.worst, ex / bound);
            ++c.points;
            if (ex < 0.0 || ex > bound * (1.0 + 1e-12)) c.passed = false;
        }
    return c;
}

// Second difference of 1 / rho is nonpositive (concavity).
inline InvariantCheck inverse_rho_concave(const std::vector<double>& alphas, int n = 1000)
{
    InvariantCheck c{"1/rho concave", true, -std::numeric_limits<double>::infinity(), 1e-12, 0};
    const double h = 1e-4;
    for (double a : alphas)
        for (double u : unit_grid(n)) {
            const double x = 2.0 * h + u * (1.0 - 4.0 * h);
            const double fm = std::exp(-log_rho(x - h, a)), f0 = std::exp(-log_rho(x, a)),
                         fp = std::exp(-log_rho(x + h, a));
            const double d2 = (fp - 2 * f0 + fm) / (h * h);
            c.worst = std::max(c.worst, d2);
            ++c.points;
            if (d2 > 1e-12 + 16.0 * std::numeric_limits<double>::epsilon() * std::fabs(f0) / (h * h))
                c.passed = false;
        }
    return c;
}

// Two-sided power bounds on sigma in terms of (1 - x).
inline InvariantCheck sigma_power_bounds(const std::vector<double>& alphas, int n = 1000)
{
    InvariantCheck c{"sigma between the (1-x)^(-1/(1-alpha)) envelopes", true,
                     -std::numeric_limits<double>::infinity(), 0.0, 0};
    for (double a : alphas)
        for (double x : unit_grid(n)) {
            const double k = 1.0 / (1.0 - a);
            const double ls = log_sigma(x, 1.0 - x, a);
            const double lower = -k * std::log(4.0) + k * std::log(std::sin(a * detail::kPi)) - k * std::log1p(-x);
            const double upper = a * k * std::log(a) + std::log(1.0 - a) - k * std::log1p(-x);
            const double slack = 1e-12 * (1.0 + std::fabs(ls));
            c.worst = std::max({c.worst, lower - ls, ls - upper});
            ++c.points;
            if (ls < lower - slack || ls > upper + slack) c.passed = false;
        }
    return c;
}

// sigma'(x) <= alpha^r (1 - alpha)(r + 1)(1 - x)^-(r + 2).
inline InvariantCheck sigma_prime_bound(const std::vector<double>& alphas, int n = 1000)
{
    InvariantCheck c{"sigma' below the derivative of the upper envelope", true,
                     -std::numeric_limits<double>::infinity(), 0.0, 0};
    for (double a : alphas)
        for (double x : unit_grid(n)) {
            const double r = a / (1.0 - a);
            const double lhs = log_sigma(x, 1.0 - x, a) + std::log(dlog_sigma(x, a, 1));
            const double rhs = r * std::log(a) + std::log(1.0 - a) + std::log(r + 1.0) - (r + 2.0) * std::log1p(-x);
            c.worst = std::max(c.worst, lhs - rhs);
            ++c.points;
            if (lhs > rhs + 1e-12 * (1.0 + std::fabs(rhs))) c.passed = false;
        }
    return c;
}

// (1 - alpha)/2 <= acceptance ratio <= 1 over excess x s, s and alpha grids.
inline InvariantCheck mixture_sandwich(int nx = 200, int ns = 50, const std::vector<double>& alphas = {0.1, 0.3, 0.5, 0.7, 0.9})
{
    InvariantCheck c{"undershoot acceptance ratio within [(1-alpha)/2, 1]", true,
                     std::numeric_limits<double>::infinity(), 0.0, 0};
    for (double a : alphas) {
        const double r = a / (1.0 - a);
        for (int j = 0; j < ns; ++j) {
            const double ls = std::log(1e-3) + j * (std::log(1e6) / (ns - 1));   // s in [1e-3, 1e3]
            for (int i = 0; i < nx; ++i) {
                // excess relative to s^-r from 1e-12 to 1e12
                const double lrel = std::log(1e-12) + i * (std::log(1e24) / (nx - 1));
                const double lx = lrel - r * ls;
                const double la = su_log_acceptance(lx, std::exp(ls), a);
                const double lo = std::log((1.0 - a) / 2.0);
                c.worst = std::min(c.worst, la - lo);
                ++c.points;
                if (la > 1e-12 || la < lo - 1e-12) c.passed = false;
            }
        }
    }
    c.bound = 0.0;
    return c;
}

// s with alpha s^r = sigma(z), i.e. the scale at which the region split sits at z.
inline double scale_for_split(double alpha, double z)
{
    const double r = alpha / (1.0 - alpha);
    return std::exp((log_sigma(z, 1.0 - z, alpha) - std::log(alpha)) / r);
}

// Acceptance floors of the second proposal, evaluated at proposals generated by
// the corresponding inversions over a grid of uniforms and split points.
inline std::vector<InvariantCheck> acceptance_floors(int nu = 400)
{
    const double e = std::exp(1.0);
    InvariantCheck hb{"low-region acceptance >= e^-1 (2 + pi^2/4)^-1 (1 - 1e-9)", true,
                      std::numeric_limits<double>::infinity(), 1.0 / (e * (2.0 + detail::kPi * detail::kPi / 4.0)), 0};
    InvariantCheck hc1{"mid-region acceptance (alpha <= 1/2) >= 4 / (3 pi sqrt(e))", true,
                       std::numeric_limits<double>::infinity(), 4.0 / (3.0 * detail::kPi * std::sqrt(e)), 0};
    InvariantCheck hc2{"mid-region acceptance (alpha > 1/2) / (1-alpha)^2 >= e^-1 (pi/4 + sqrt 2) / pi", true,
                       std::numeric_limits<double>::infinity(),
                       (detail::kPi / 4.0 + std::sqrt(2.0)) / (e * detail::kPi), 0};
    const std::vector<double> low_alphas = {0.05, 0.1, 0.2, 0.3, 0.4, 0.45, 0.5};
    const std::vector<double> high_alphas = {0.55, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
    const std::vector<double> splits = {0.05, 0.2, 0.4, 0.5, 0.6, 0.8, 0.9, 0.99, 0.999};
    std::vector<double> all = low_alphas;
    all.insert(all.end(), high_alphas.begin(), high_alphas.end());
    for (double a : all) {
        for (double z : splits) {
            const double s = scale_for_split(a, z);
            const double log_c = -a / (1.0 - a) * std::log(s);
            const double zs = std::min(z, 0.5);
            for (int i = 0; i < nu; ++i) {
                const double u = (i + 0.5) / nu;
                const double y = invert_u_sigma_alpha(a, zs, u);
                const double v = std::exp(psi2_log_accept_low(y, a, log_c));
                hb.worst = std::min(hb.worst, v);
                ++hb.points;
                if (v < hb.bound * (1.0 - 1e-9)) hb.passed = false;
                if (z <= 0.5) continue;
                if (a <= 0.5) {
                    const double y1 = a == 0.5 ? 1.0 - 0.5 * std::pow(2.0 * (1.0 - z), u) : invert_F_c1_fraction(a, z, u);
                    const double v1 = std::exp(psi2_log_accept_mid_small(y1, a, log_c));
                    hc1.worst = std::min(hc1.worst, v1);
                    ++hc1.points;
                    if (v1 < hc1.bound || v1 > 1.0 + 1e-12) hc1.passed = false;
                } else {
                    const double y2 = invert_rho_power(a, z, u);
                    const double v2 = std::exp(psi2_log_accept_mid_large(y2, a, log_c));
                    const double ratio = v2 / ((1.0 - a) * (1.0 - a));
                    hc2.worst = std::min(hc2.worst, ratio);
                    ++hc2.points;
                    if (ratio < hc2.bound || v2 > 1.0 + 1e-12) hc2.passed = false;
                }
            }
        }
    }
    return {hb, hc1, hc2};
}

// alpha s^r < sigma(0+) leaves only the log-concave region.
inline InvariantCheck degenerate_regions()
{
    InvariantCheck c{"region weights reduce to the last region when alpha s^r < sigma(0+)", true, 0.0, 0.0, 0};
    for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double r = a / (1.0 - a);
        const double s_edge = std::exp((log_sigma0(a) - std::log(a)) / r);
        for (double f : {1e-3, 0.1, 0.5, 0.9, 0.999}) {
            const UndershootContext ctx(s_edge * f, a);
            const auto p = ctx.regions.probabilities();
            c.worst = std::max({c.worst, p[0], p[1]});
            ++c.points;
            if (ctx.z != 0.0 || p[0] != 0.0 || p[1] != 0.0 || p[2] != 1.0) c.passed = false;
        }
    }
    return c;
}

// The last-region target restricted to [z, 1] is log-concave: second differences <= 1e-10.
inline InvariantCheck last_region_log_concave()
{
    InvariantCheck c{"last-region target log-concave on [z,1]", true, -std::numeric_limits<double>::infinity(),
                     1e-10, 0};
    for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        for (double s : {0.1, 1.0, 10.0, 100.0}) {
            const UndershootContext ctx(s, a);
            const SigmaFamily fam{a, a, ctx.log_c};
            const double z = ctx.z, zc = 1.0 - z;
            const double h = 1e-4;
            for (int i = 1; i < 200; ++i) {
                const double v = std::clamp(i / 200.0, h, 1.0 - h);
                auto g = [&](double t) { return fam.log_value(z + t * zc, (1.0 - t) * zc); };
                const double d2 = (g(v + h) - 2.0 * g(v) + g(v - h)) / (h * h);
                const double noise = 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(g(v))) / (h * h);
                c.worst = std::max(c.worst, d2);
                ++c.points;
                if (d2 > 1e-10 + noise) c.passed = false;
            }
        }
    }
    return c;
}

}  // namespace checks

// Runs every grid check; deterministic.
inline InvariantReport invariant_grid_suite()
{
    InvariantReport rep;
    const std::vector<double> lemma_alphas = {0.1, 0.5, 0.9};
    rep.checks.push_back(checks::log_sigma_derivatives([](double u, double a) { return log_sigma(u, 1.0 - u, a); },
                                                       lemma_alphas));
    rep.checks.push_back(checks::sigma_linear_bound(lemma_alphas));
    rep.checks.push_back(checks::inverse_rho_concave(lemma_alphas));
    rep.checks.push_back(checks::sigma_power_bounds(lemma_alphas));
    rep.checks.push_back(checks::sigma_prime_bound(lemma_alphas));
    rep.checks.push_back(checks::mixture_sandwich());
    for (auto& c : checks::acceptance_floors()) rep.checks.push_back(std::move(c));
    rep.checks.push_back(checks::degenerate_regions());
    rep.checks.push_back(checks::last_region_log_concave());
    return rep;
}

}  // namespace subpass
