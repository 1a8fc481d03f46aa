#pragma once

// Primitive exact variates drawn from an RngStream.

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "params.hpp"
#include "rng.hpp"

namespace subpass {

inline double sample_uniform(RngStream& rng) { return rng.uniform(); }

inline double exponential_from_uniform(double u) { return -std::log(u); }

inline double sample_exponential(RngStream& rng) { return exponential_from_uniform(rng.uniform()); }

inline double sample_normal(RngStream& rng)
{
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * rng.uniform());
}

// log of a Gamma(shape, 1) draw. Shape >= 1: Marsaglia-Tsang squeeze rejection.
// Shape < 1: a Gamma(shape + 1) draw times U^(1/shape), kept in log form so
// that tiny shapes do not underflow.
inline double sample_log_gamma(double shape, RngStream& rng)
{
    require(shape > 0.0 && std::isfinite(shape), "gamma shape must be positive");
    if (shape < 1.0) {
        const double lg = sample_log_gamma(shape + 1.0, rng);
        return lg + std::log(rng.uniform()) / shape;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        ++rng.work.rejections;
        double x, v;
        do {
            x = sample_normal(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d) + std::log(v);
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d) + std::log(v);
    }
}

inline double sample_gamma(double shape, double rate, RngStream& rng)
{
    require(rate > 0.0 && std::isfinite(rate), "gamma rate must be positive");
    return std::exp(sample_log_gamma(shape, rng)) / rate;
}

// N(0, scale^2) restricted to [0,1], by inversion of erf(x / sqrt(2 scale^2)) / erf(1 / sqrt(2 scale^2)).
inline double sample_truncated_normal(double scale, RngStream& rng)
{
    require(scale > 0.0 && std::isfinite(scale), "truncated normal scale must be positive");
    const double k = 1.0 / (std::numbers::sqrt2 * scale);
    const double top = std::erf(k);
    const double x = boost::math::erf_inv(rng.uniform() * top) / k;
    return x > 1.0 ? 1.0 : x;
}

}  // namespace subpass
