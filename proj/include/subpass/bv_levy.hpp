#pragma once

// First passage of Z = Z+ - Z- over a constant level, where Z+ and Z- are
// independent driftless tempered stable subordinators. The horizon is finite.

#include <cmath>
#include <cstdint>

#include "boundary.hpp"
#include "first_passage.hpp"
#include "marginals.hpp"
#include "params.hpp"
#include "rng.hpp"

namespace subpass {

struct BVProcessSpec {
    TemperedParams plus;
    TemperedParams minus;
    double drift = 0.0;   // only 0 is supported

    BVProcessSpec(TemperedParams p, TemperedParams m, double d = 0.0) : plus(p), minus(m), drift(d)
    {
        require(d == 0.0, "bounded-variation process drift must be 0");
    }
};

struct BVPassageResult {
    double time = 0.0;         // min(tau_c, T)
    double left_limit = 0.0;   // Z at time-
    double value = 0.0;        // Z at time
    bool stopped_by_horizon = false;
    std::uint64_t inner_passages = 0;       // first-passage triplets of Z+ drawn
    std::uint64_t horizon_resamples = 0;    // Z+ marginal draws conditioned below the level
};

// Continues a path of Z from (t0, z0) until Z exceeds c or time reaches T.
// c - z0 > 0 is the remaining distance. Consecutive levels on one path are
// handled by calling this with the state returned for the previous level.
inline BVPassageResult bvfp_continue(const BVProcessSpec& spec, double c, double T, double t0, double z0,
                                     RngStream& rng, const Precision& prec = {})
{
    require(c > 0.0 && std::isfinite(c), "bvfp_sample requires a level c > 0");
    require(T > 0.0 && std::isfinite(T), "bvfp_sample requires a finite horizon T > 0");
    require(t0 >= 0.0 && t0 <= T && z0 < c, "bvfp_continue requires a start before the horizon and below c");
    BVPassageResult res;
    double t = t0, h = z0, b = c - z0;
    double u = 0.0, v = 0.0;
    if (t >= T) {
        res.time = T;
        res.left_limit = res.value = h;
        res.stopped_by_horizon = true;
        return res;
    }
    for (;;) {
        const PassageTriplet x = tsffp_sample(spec.plus, Boundary::constant(b), rng, prec);
        ++res.inner_passages;
        const double s = x.tau;
        u = x.pre;
        v = x.post;
        if (s + t >= T) {
            // Z+ has not crossed b by T - t: its marginal conditioned below b.
            const double rest = T - t;
            double up;
            do {
                ++rng.work.rejections;
                ++res.horizon_resamples;
                up = sample_tempered_stable(spec.plus, rest, rng);
            } while (!(up < b));
            const double wm = sample_tempered_stable(spec.minus, rest, rng);
            res.time = T;
            res.left_limit = res.value = h + up - wm;
            res.stopped_by_horizon = true;
            return res;
        }
        const double w = sample_tempered_stable(spec.minus, s, rng);
        t += s;
        h += v - w;
        b += w - v;
        // b == 0 leaves Z exactly at c; probability zero, counted as a crossing.
        if (b <= 0.0) break;
    }
    res.time = t;
    res.left_limit = h + u - v;
    res.value = h;
    return res;
}

// Triplet (min(tau_c, T), Z_{.-}, Z_.) of Z started at 0.
inline BVPassageResult bvfp_sample(const BVProcessSpec& spec, double c, double T, RngStream& rng,
                                   const Precision& prec = {})
{
    return bvfp_continue(spec, c, T, 0.0, 0.0, rng, prec);
}

// Laplace exponent of the tempered stable subordinator: ((u + q)^alpha - q^alpha) theta.
inline double tempered_laplace_exponent(const TemperedParams& tp, double u)
{
    require(u >= 0.0, "Laplace exponent requires u >= 0");
    return (std::pow(u + tp.q, tp.alpha()) - std::pow(tp.q, tp.alpha())) * tp.theta();
}

// Bound 1 + e^(uc) / (psi(u) - p) on E[exp(p tau_c)] for the passage over level c.
inline double exp_moment_bound(const TemperedParams& tp, double c, double p, double u)
{
    require(c > 0.0, "exp_moment_bound requires c > 0");
    require(u > 0.0, "exp_moment_bound requires u > 0");
    const double psi = tempered_laplace_exponent(tp, u);
    require(psi > p, "exp_moment_bound requires psi(u) > p (the bound is vacuous otherwise)");
    return 1.0 + std::exp(u * c) / (psi - p);
}

}  // namespace subpass
