#pragma once

// Exact samplers for stable and tempered stable marginals S_t.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "params.hpp"
#include "rng.hpp"
#include "variates.hpp"
#include "zolotarev.hpp"

namespace subpass {

// log S_t from injected draws U ~ U(0,1), E ~ Exp(1):
// S_t = (theta t)^(1/alpha) (sigma(U) / E)^((1 - alpha) / alpha).
inline double log_stable_from_uniforms(const StableParams& p, double t, double u, double e)
{
    const double a = p.alpha;
    return std::log(p.theta * t) / a + (1.0 - a) / a * (log_sigma(u, a) - std::log(e));
}

inline double stable_from_uniforms(const StableParams& p, double t, double u, double e)
{
    return std::exp(log_stable_from_uniforms(p, t, u, e));
}

inline double sample_log_stable(const StableParams& p, double t, RngStream& rng)
{
    require(t > 0.0 && std::isfinite(t), "sample_stable requires t > 0");
    const double u = rng.uniform();
    const double e = sample_exponential(rng);
    return log_stable_from_uniforms(p, t, u, e);
}

inline double sample_stable(const StableParams& p, double t, RngStream& rng)
{
    return std::exp(sample_log_stable(p, t, rng));
}

// Bounding constants of the tempered sampler, in logs. Index 0 is the
// truncated-normal normaliser; 1..4 are the envelope constants of the branches.
inline std::array<double, 5> tempered_log_constants(double a, double x)
{
    const double ac = 1.0 - a;
    const double ax = a * x, cx = ac * x;
    const double lroot = 0.5 * std::log(2.0 * std::numbers::pi * a * ac * x);
    std::array<double, 5> c{};
    c[0] = std::log(std::erf(std::sqrt(a * ac * x * std::numbers::pi * std::numbers::pi / 2.0))) - lroot;
    c[1] = std::lgamma(ax) + ax - 1.0 - x * std::log(ax) + (1.0 + cx) * std::log(a / ac + ax);
    c[2] = std::lgamma(1.0 + cx) + cx - cx * std::log(cx);
    c[3] = std::lgamma(1.0 + ax) + ax - 1.0 + (1.0 + cx) * std::log1p(1.0 / cx) - ax * std::log(ax) -
           lroot;
    c[4] = c[2] - lroot;
    return c;
}

// Branch 1..4 chosen by the smallest envelope constant; a pure function of (alpha, xi).
inline int tempered_branch(double alpha, double xi)
{
    const auto c = tempered_log_constants(alpha, xi);
    int best = 1;
    for (int i = 2; i <= 4; ++i)
        if (c[i] < c[best]) best = i;
    return best;
}

// iterations, when given, receives the number of outer accept-reject rounds.
inline double sample_log_tempered_stable(const TemperedParams& tp, double t, RngStream& rng,
                                         std::uint64_t* iterations = nullptr)
{
    require(t > 0.0 && std::isfinite(t), "sample_tempered_stable requires t > 0");
    if (tp.q == 0.0) {
        if (iterations) *iterations = 1;
        return sample_log_stable(tp.base, t, rng);
    }

    const double a = tp.alpha();
    const double ac = 1.0 - a;
    const double r = a / ac;
    const double log_scale = std::log(tp.theta() * t) / a;   // log (theta t)^(1/alpha)
    const double log_lambda = log_scale + std::log(tp.q);
    const double log_xi = a * log_lambda;
    const double xi = std::exp(log_xi);
    const auto c = tempered_log_constants(a, xi);
    const int branch = tempered_branch(a, xi);
    // The truncated-normal proposal has variance 1 / (pi^2 a (1-a) xi); the
    // matching likelihood ratio is C0 exp(pi^2 a (1-a) xi U^2 / 2).
    const double kappa = std::numbers::pi * std::numbers::pi * a * ac * xi;
    const bool normal_u = branch >= 3;
    const bool gamma_small = branch == 1 || branch == 3;
    const double shape = gamma_small ? a * xi : 1.0 + ac * xi;
    const double log_gamma_shape = std::lgamma(shape);

    for (std::uint64_t it = 1;; ++it) {
        ++rng.work.rejections;
        double u;
        if (normal_u) {
            u = sample_truncated_normal(1.0 / std::sqrt(kappa), rng);
            if (u >= 1.0) continue;
        } else {
            u = rng.uniform();
        }
        const double v = rng.uniform();
        const double lx = sample_log_gamma(shape, rng);
        const double lrho = u == 0.0 ? log_rho0(a) : log_rho(u, a);
        double log_s, log_acc;
        if (gamma_small) {
            log_s = lx - log_lambda;
            const double la = (r + 1.0) * (lrho + log_xi);
            log_acc = std::log(r) + xi + log_gamma_shape + la - (r + a * xi) * lx - std::exp(la - r * lx);
        } else {
            log_s = lrho / a - lx / r;
            log_acc = xi + log_gamma_shape - ac * xi * lx - std::exp(log_lambda + log_s);
        }
        if (normal_u) log_acc += c[0] + 0.5 * kappa * u * u;
        log_acc -= c[branch];
        if (std::log(v) <= log_acc) {
            if (iterations) *iterations = it;
            return log_scale + log_s;
        }
    }
}

// Exact draw of S_t under the Esscher-tempered measure with rate q. q = 0
// uses the stable sampler on the same draws.
inline double sample_tempered_stable(const TemperedParams& tp, double t, RngStream& rng)
{
    return std::exp(sample_log_tempered_stable(tp, t, rng));
}

}  // namespace subpass
