#pragma once

// Exact sampling of the stable undershoot S_{t-} given a jump crossing of
// level w at time t. Work happens in the dimensionless scale s = (theta t)^(-1/alpha) w
// on the extended space (x, y), x > s^-r, y in (0,1), with target density
// proportional to (s - x^(-1/r))^(-alpha) sigma(y) exp(-sigma(y) x).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "logconcave.hpp"
#include "params.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "rootfind.hpp"
#include "variates.hpp"
#include "zolotarev.hpp"

namespace subpass {

namespace detail {

inline double log_add(double a, double b)
{
    if (a < b) std::swap(a, b);
    if (!std::isfinite(b)) return a;
    return a + std::log1p(std::exp(b - a));
}

// log(1 + e^l)
inline double softplus(double l) { return l > 0.0 ? l + std::log1p(std::exp(-l)) : std::log1p(std::exp(l)); }

}  // namespace detail

struct UndershootContext {
    double alpha;
    double s;              // may be inf when only log_s is representable
    double r;
    double log_s;
    double log_c;          // log s^-r
    double z = 0.0;        // sigma^-1(alpha s^r), or 0 when alpha s^r < sigma(0+)
    double z_star = 0.0;   // min(z, 1/2)
    RegionWeights regions; // integrals of sigma^alpha exp(-sigma s^-r) over [0,z*], [z*,z], [z,1]
    MixtureWeight mix;     // p' and p
    Precision prec;

    UndershootContext(double s_, double alpha_, const Precision& pr = {}, const QuadratureSpec& spec = {},
                      WorkCounters* wc = nullptr)
        : UndershootContext(LogScale{checked_log(s_)}, alpha_, pr, spec, wc)
    {
    }

    // Scale given by its logarithm; s itself may overflow for small alpha.
    struct LogScale {
        double value;
    };

    UndershootContext(LogScale ls, double alpha_, const Precision& pr = {}, const QuadratureSpec& spec = {},
                      WorkCounters* wc = nullptr)
        : alpha(alpha_), prec(pr)
    {
        require(alpha > 0.0 && alpha < 1.0, "alpha in (0,1) required");
        require(std::isfinite(ls.value), "undershoot requires s > 0");
        log_s = ls.value;
        s = std::exp(log_s);
        r = alpha / (1.0 - alpha);
        log_c = -r * log_s;
        const double log_target = std::log(alpha) + r * log_s;   // log(alpha s^r)
        if (log_target > log_sigma0(alpha)) {
            z = invert_log_sigma(alpha, log_target, prec, wc).root;
            z_star = std::min(z, 0.5);
        }
        regions = psi2_region_weights_log_scale(log_s, alpha, z, z_star, spec, wc);
        const double i1 = log_sigma_integral(alpha, 0.0, log_c, 0.0, 1.0, spec, wc);
        mix = mixture_weight_from_log_scale(log_s, alpha, i1, regions.log_total());
    }

    double p() const { return mix.p; }

private:
    static double checked_log(double s)
    {
        require(s > 0.0 && std::isfinite(s), "undershoot requires s > 0");
        return std::log(s);
    }
};

struct PsiSample {
    double zeta;     // s^-r + excess; may be +inf in floating point when s is tiny
    double y;
    double log_excess;   // log(zeta - s^-r), held separately: the excess may underflow
};

// log of the acceptance ratio for a proposal with log(zeta - s^-r) = lx, given ls = log s.
inline double su_log_acceptance_log_scale(double lx, double ls, double alpha)
{
    require(!std::isnan(lx) && lx > -std::numeric_limits<double>::infinity(),
            "su_acceptance_ratio requires zeta > s^-r");
    require(std::isfinite(ls), "su_acceptance_ratio requires s > 0");
    const double r = alpha / (1.0 - alpha);
    // s - zeta^(-1/r) = s (1 - (1 + excess s^r)^(-1/r))
    const double sp = detail::softplus(lx + r * ls);
    const double log_gap = ls + std::log(-std::expm1(-sp / r));
    const double num = -alpha * log_gap;
    const double t1 = -alpha * std::log1p(-std::pow(2.0, alpha - 1.0)) - alpha * ls;
    const double t2 = alpha * std::log(2.0 * r) - r * ls - alpha * lx;
    return num - detail::log_add(t1, t2);
}

inline double su_log_acceptance(double lx, double s, double alpha)
{
    require(s > 0.0, "su_acceptance_ratio requires s > 0");
    return su_log_acceptance_log_scale(lx, std::log(s), alpha);
}

inline double su_acceptance_ratio(double zeta, double s, double alpha)
{
    require(alpha > 0.0 && alpha < 1.0, "alpha in (0,1) required");
    const double r = alpha / (1.0 - alpha);
    const double floor = std::pow(s, -r);
    require(zeta > floor, "su_acceptance_ratio requires zeta > s^-r");
    return std::exp(su_log_acceptance(std::log(zeta - floor), s, alpha));
}

namespace detail {

inline PsiSample make_psi_sample(const UndershootContext& ctx, double y, double log_sigma_y, double log_e)
{
    const double lx = log_e - log_sigma_y;
    return {std::exp(ctx.log_c) + std::exp(lx), y, lx};
}

inline double log_sigma_at(double y, double alpha)
{
    return y == 0.0 ? log_sigma0(alpha) : log_sigma(y, 1.0 - y, alpha);
}

}  // namespace detail

// Proposal with y-marginal proportional to exp(-sigma(y) s^-r) and a shifted
// exponential excess of rate sigma(y).
inline PsiSample sample_psi1(const UndershootContext& ctx, RngStream& rng)
{
    const SigmaFamily fam{ctx.alpha, 0.0, ctx.log_c};
    auto log_f = [&](double y) { return fam.log_value(y, 1.0 - y); };
    const double y = sample_logconcave(log_f, rng);
    const double le = std::log(sample_exponential(rng));
    return detail::make_psi_sample(ctx, y, detail::log_sigma_at(y, ctx.alpha), le);
}

// Region variable by one uniform against cumulative weights; ties go to the lower index.
inline int sample_region(const RegionWeights& w, RngStream& rng)
{
    const auto pr = w.probabilities();
    const double u = rng.uniform();
    if (u <= pr[0]) return 0;
    if (u <= pr[0] + pr[1]) return 1;
    return 2;
}

// log acceptance probabilities of the second proposal's y-marginal; log_c = log s^-r.

// Region [0, z*]: exp(-sigma(y) s^-r) / (1 + alpha y sigma'(y) / sigma(y)).
inline double psi2_log_accept_low(double y, double a, double log_c)
{
    const double ls = detail::log_sigma_at(y, a);
    const double slope = y == 0.0 ? 0.0 : y * dlog_sigma(y, a, 1);
    return -std::exp(ls + log_c) - std::log1p(a * slope);
}

// Region [1/2, z] for alpha <= 1/2.
inline double psi2_log_accept_mid_small(double y, double a, double log_c)
{
    const double ka = std::sin(detail::kPi * (1.0 - a));
    const double kb = detail::kPi * a * (1.0 - a) * std::cos(detail::kPi * a);
    const double r = a / (1.0 - a);
    const double yc = 1.0 - y;
    const double ls = log_sigma(y, yc, a);
    return a * ls - std::exp(ls + log_c) + (1.0 - a) * std::log(ka) + r * std::log(2.0) + r * std::log(yc) -
           std::log(ka + kb * yc);
}

// Region [1/2, z] for alpha > 1/2: C rho^2 / rho' exp(-sigma s^-r), C = rho'(1/2) / rho(1/2)^2.
inline double psi2_log_accept_mid_large(double y, double a, double log_c)
{
    const double log_cst = std::log(rho_prime(0.5, a)) - 2.0 * log_rho(0.5, a);
    const double lr = log_rho(y, a);
    // rho^2 / rho' = rho / (log rho)'
    return log_cst - std::exp(lr / (1.0 - a) + log_c) + lr - std::log(dlog_rho(y, a, 1));
}

// y-marginal of the second proposal, proportional to sigma^alpha exp(-sigma s^-r).
inline double sample_psi2_y(const UndershootContext& ctx, RngStream& rng, int* region = nullptr)
{
    const double a = ctx.alpha;
    const int d = sample_region(ctx.regions, rng);
    if (region) *region = d;
    WorkCounters* wc = &rng.work;

    if (d == 2) {
        // Log-concave on [z,1] with mode z; mapped affinely onto [0,1] and normalised.
        const SigmaFamily fam{a, a, ctx.log_c};
        const double z = ctx.z, zc = 1.0 - z;
        const double top = fam.log_value(z, zc);
        auto log_g = [&](double v) { return fam.log_value(z + v * zc, (1.0 - v) * zc) - top; };
        const double v = sample_logconcave(log_g, rng);
        return z + v * zc;
    }
    if (d == 0) {
        for (;;) {
            ++rng.work.rejections;
            const double y = invert_u_sigma_alpha(a, ctx.z_star, rng.uniform(), ctx.prec, wc);
            if (std::log(rng.uniform()) <= psi2_log_accept_low(y, a, ctx.log_c)) return y;
        }
    }
    // d == 1: here z > 1/2 = z*.
    const double z = ctx.z;
    if (a <= 0.5) {
        for (;;) {
            ++rng.work.rejections;
            const double v = rng.uniform();
            double y;
            if (a == 0.5) {
                // Density proportional to (1-u)^-1 on [1/2, z], inverted in closed form.
                y = 1.0 - 0.5 * std::pow(2.0 * (1.0 - z), v);
            } else {
                y = invert_F_c1_fraction(a, z, v, ctx.prec, wc);
            }
            if (std::log(rng.uniform()) <= psi2_log_accept_mid_small(y, a, ctx.log_c)) return y;
        }
    }
    for (;;) {
        ++rng.work.rejections;
        const double y = invert_rho_power(a, z, rng.uniform(), ctx.prec, wc);
        if (std::log(rng.uniform()) <= psi2_log_accept_mid_large(y, a, ctx.log_c)) return y;
    }
}

inline PsiSample sample_psi2(const UndershootContext& ctx, RngStream& rng)
{
    const double y = sample_psi2_y(ctx, rng);
    const double le = sample_log_gamma(1.0 - ctx.alpha, rng);
    return detail::make_psi_sample(ctx, y, detail::log_sigma_at(y, ctx.alpha), le);
}

struct UndershootDraw {
    double value;                 // zeta^(-1/r) / s in [0, 1); underflows to 0 for huge s
    double log_value;             // log of value at full resolution
    double log_gap;               // log(1 - value) at full resolution
    std::uint64_t outer_iterations;
};

// Draw from the undershoot law in scale s; value is the fraction zeta^(-1/r) / s of w.
inline UndershootDraw sample_undershoot_fraction(const UndershootContext& ctx, RngStream& rng)
{
    for (std::uint64_t it = 1;; ++it) {
        ++rng.work.rejections;
        const double v1 = rng.uniform(), v2 = rng.uniform();
        const PsiSample ps = v1 < ctx.p() ? sample_psi1(ctx, rng) : sample_psi2(ctx, rng);
        if (std::log(v2) <= su_log_acceptance_log_scale(ps.log_excess, ctx.log_s, ctx.alpha)) {
            // zeta^(-1/r) / s = (1 + excess s^r)^(-1/r)
            const double sp = detail::softplus(ps.log_excess + ctx.r * ctx.log_s);
            double frac = std::exp(-sp / ctx.r);
            const double log_gap = std::log(-std::expm1(-sp / ctx.r));
            // The fraction rounds to 1 when excess s^r is below machine epsilon;
            // log_gap keeps the distance to 1.
            if (frac >= 1.0) frac = std::nextafter(1.0, 0.0);
            return {frac, -sp / ctx.r, log_gap, it};
        }
    }
}

inline UndershootDraw sample_undershoot_draw(double t, double w, const StableParams& p, RngStream& rng,
                                             const Precision& prec = {})
{
    require(t > 0.0 && std::isfinite(t), "sample_undershoot requires t > 0");
    require(w > 0.0 && std::isfinite(w), "sample_undershoot requires w > 0");
    const double log_s = std::log(w) - std::log(p.theta * t) / p.alpha;
    const UndershootContext ctx(UndershootContext::LogScale{log_s}, p.alpha, prec, {}, &rng.work);
    return sample_undershoot_fraction(ctx, rng);
}

// Exact draw from the undershoot law given a jump crossing of level w at time t.
inline double sample_undershoot(double t, double w, const StableParams& p, RngStream& rng,
                                const Precision& prec = {}, std::uint64_t* outer_iterations = nullptr)
{
    const auto d = sample_undershoot_draw(t, w, p, rng, prec);
    if (outer_iterations) *outer_iterations = d.outer_iterations;
    return w * d.value;
}

}  // namespace subpass
