#pragma once

// First-passage triplets (tau, S_{tau-}, S_tau) of stable and tempered stable
// subordinators over nonincreasing barriers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "boundary.hpp"
#include "marginals.hpp"
#include "params.hpp"
#include "rng.hpp"
#include "undershoot.hpp"
#include "variates.hpp"

namespace subpass {

struct PassageTriplet {
    double tau = 0.0;
    double pre = 0.0;    // S_{tau-}
    double post = 0.0;   // S_tau
    bool crept = false;
};

// Loop counts of the first-passage samplers, accumulated across calls.
struct PassageStats {
    std::uint64_t stable_proposals = 0;   // S_1 draws until V1 >= B(t*)
    std::uint64_t grid_steps = 0;         // tempered marginal draws on the t* grid
    std::uint64_t tilt_proposals = 0;     // conditioned stable proposals before the exponential-tilt acceptance
    std::uint64_t capped_rounds = 0;      // passages over the capped barrier
    std::uint64_t undershoot_iterations = 0;
};

namespace detail {

// Crossing time under the stable law conditional on tau <= t_star: T = B^-1(V1)
// with V1 ~ S_1 conditioned on V1 >= B(t_star).
inline double sfp_time(const StableParams& p, const Boundary& b, double t_star, RngStream& rng,
                       const Precision& prec, PassageStats* stats)
{
    require(t_star > 0.0, "sfp_sample requires t_star > 0");
    // In logs: S_1 leaves the double range for small alpha.
    const double threshold = b.log_B(t_star, p.alpha);
    double lv1;
    do {
        ++rng.work.rejections;
        if (stats) ++stats->stable_proposals;
        lv1 = sample_log_stable(p, 1.0, rng);
    } while (lv1 < threshold);
    return b.inverse_log_B(lv1, p.alpha, prec, &rng.work);
}

// Creep test, undershoot and overshoot given the crossing time T.
inline PassageTriplet sfp_complete(const StableParams& p, const Boundary& b, double T, RngStream& rng,
                                   const Precision& prec, PassageStats* stats)
{
    const double a = p.alpha;
    const double bT = b.b(T);
    const double u1 = rng.uniform();
    const double d = -b.b_prime(T);
    if (d > 0.0 && u1 <= d / (d + bT / (a * T))) return {T, bT, bT, true};

    const double u2 = rng.uniform();
    const auto d2 = sample_undershoot_draw(T, bT, p, rng, prec);
    if (stats) stats->undershoot_iterations += d2.outer_iterations;
    // Pareto overshoot: the jump from V2 clears the gap b(T) - V2 by the factor
    // U2^(-1/alpha). The gap comes from the undershoot draw at full resolution;
    // the guards keep pre < b(T) < post when it is below the spacing of doubles at b(T).
    const double gap = bT * std::exp(d2.log_gap);
    const double pre = std::min(bT * d2.value, std::nextafter(bT, 0.0));
    const double post = std::max(bT + gap * std::expm1(-std::log(u2) / a),
                                 std::nextafter(bT, std::numeric_limits<double>::infinity()));
    return {T, pre, post, false};
}

}  // namespace detail

// Triplet under the stable law conditional on tau <= t_star (t_star may be inf).
inline PassageTriplet sfp_sample(const StableParams& p, const Boundary& b, double t_star, RngStream& rng,
                                 const Precision& prec = {}, PassageStats* stats = nullptr)
{
    const double T = detail::sfp_time(p, b, t_star, rng, prec, stats);
    return detail::sfp_complete(p, b, T, rng, prec, stats);
}

// Grid step of the tempered sampler.
inline double tsfp_grid_step(const TemperedParams& tp, double b0)
{
    const double a = tp.alpha(), q = tp.q;
    return (2.0 * q * b0 + 1.0 - std::pow(2.0, -a)) / ((std::pow(2.0, a) - 1.0) * std::pow(q, a) * tp.theta());
}

// Tempered triplet with an explicit grid step t_star.
inline PassageTriplet tsfp_sample_grid(const TemperedParams& tp, const Boundary& b, double t_star, RngStream& rng,
                                       const Precision& prec = {}, PassageStats* stats = nullptr)
{
    require(tp.q > 0.0, "tsfp_sample_grid requires q > 0");
    require(t_star > 0.0 && std::isfinite(t_star), "tsfp_sample_grid requires a finite t_star > 0");
    double T = 0.0, U = 0.0;
    Boundary c = b;
    for (;;) {
        ++rng.work.rejections;
        if (stats) ++stats->grid_steps;
        const double s = sample_tempered_stable(tp, t_star, rng);
        // A tie s == c(t*) has probability zero; it is routed to the exit branch.
        if (!(s < c.b(t_star))) break;
        T += t_star;
        U += s;
        c = c.shifted(t_star, s);
    }
    for (;;) {
        ++rng.work.rejections;
        if (stats) ++stats->tilt_proposals;
        const double tau = detail::sfp_time(tp.base, c, t_star, rng, prec, stats);
        const double rest = t_star - tau;
        const double w = rest > 0.0 ? sample_stable(tp.base, rest, rng) : 0.0;
        const double e = sample_exponential(rng);
        // post >= c(tau), so this rejects before the undershoot is drawn.
        if (e < tp.q * (w + c.b(tau))) continue;
        const PassageTriplet x = detail::sfp_complete(tp.base, c, tau, rng, prec, stats);
        if (e >= tp.q * (w + x.post)) return {T + x.tau, U + x.pre, U + x.post, x.crept};
    }
}

// Tempered triplet; q = 0 reduces to the stable sampler with t_star = inf.
inline PassageTriplet tsfp_sample(const TemperedParams& tp, const Boundary& b, RngStream& rng,
                                  const Precision& prec = {}, PassageStats* stats = nullptr)
{
    if (tp.q == 0.0) return sfp_sample(tp.base, b, std::numeric_limits<double>::infinity(), rng, prec, stats);
    return tsfp_sample_grid(tp, b, tsfp_grid_step(tp, b.b0()), rng, prec, stats);
}

inline double tsffp_cap(const TemperedParams& tp) { return (std::pow(2.0, tp.alpha()) - 1.0) / (2.0 * tp.q); }

// Tempered triplet by repeated passages over the barrier capped at R above the current level.
inline PassageTriplet tsffp_sample(const TemperedParams& tp, const Boundary& b, RngStream& rng,
                                   const Precision& prec = {}, PassageStats* stats = nullptr)
{
    if (tp.q == 0.0) return sfp_sample(tp.base, b, std::numeric_limits<double>::infinity(), rng, prec, stats);
    const double R = tsffp_cap(tp);
    double T = 0.0, U = 0.0;
    Boundary c = b;
    for (;;) {
        if (stats) ++stats->capped_rounds;
        const PassageTriplet x = tsfp_sample(tp, c.capped(R), rng, prec, stats);
        T += x.tau;
        U += x.post;
        // Crossing of the uncapped barrier is decided in the current frame.
        const double level = c.b(x.tau);
        if (x.post >= level) return {T, U - (x.post - x.pre), U, x.crept};
        c = c.shifted(x.tau, x.post);
    }
}

}  // namespace subpass
