#pragma once

// Rejection sampler for a nonincreasing log-concave density on [0,1] given in
// normal form: mode at 0 and f(0) = 1. The dominating function is flat on
// (0, a1], equal to f(a1) on (a1, 2a1] and log-linear beyond, where a1 is the
// largest power 1/2^k with f(a1) >= 1/4 >= f(2a1).

#include <algorithm>
#include <cmath>
#include <limits>

#include "params.hpp"
#include "rng.hpp"

namespace subpass {

struct LogConcaveEnvelope {
    double a1 = 0.5;
    double log_f1 = 0.0;   // log f(a1)
    double log_f2 = 0.0;   // log f(2 a1); -inf when treated as 0
    double slope = 0.0;    // log(f(a1) / f(2 a1)) / a1, rate of the tail piece
    double mass[3] = {0.0, 0.0, 0.0};
    double total = 0.0;    // a0, the integral of h over [0, inf)
    int steps = 0;         // preprocessing steps spent locating a1

    // log h(x) for x in (0, 1].
    double log_h(double x) const
    {
        if (x <= a1) return 0.0;
        if (x <= 2.0 * a1) return log_f1;
        if (!std::isfinite(log_f2)) return -std::numeric_limits<double>::infinity();
        if (!(slope > 0.0)) return log_f1;
        return ((2.0 * a1 - x) * log_f1 + (x - a1) * log_f2) / a1;
    }
};

// Builds the envelope. f beyond 1 is taken as 0, so a1 = 1/2 is accepted as
// soon as f(1/2) >= 1/4.
template <class LogF>
LogConcaveEnvelope logconcave_envelope(const LogF& log_f, WorkCounters* wc = nullptr)
{
    const double lf0 = log_f(0.0);
    require(std::fabs(lf0) <= 1e-9, "sample_logconcave requires f(0) = 1 (normal form)");
    const double quarter = std::log(0.25);
    LogConcaveEnvelope env;
    double a1 = 0.5;
    double lf1 = log_f(a1);
    double lf2 = -std::numeric_limits<double>::infinity();
    env.steps = 1;
    while (!(lf1 >= quarter)) {
        lf2 = lf1;
        a1 *= 0.5;
        if (a1 < 1e-300) throw NumericFailure("sample_logconcave: density concentrated below double resolution");
        lf1 = log_f(a1);
        ++env.steps;
    }
    if (wc) wc->lc_steps += static_cast<std::uint64_t>(env.steps);
    env.a1 = a1;
    env.log_f1 = lf1;
    env.log_f2 = lf2;
    const double f1 = std::exp(lf1);
    env.mass[0] = a1;
    env.mass[1] = a1 * f1;
    if (!std::isfinite(lf2)) {
        env.slope = std::numeric_limits<double>::infinity();
        env.mass[2] = 0.0;
    } else if (lf1 > lf2) {
        env.slope = (lf1 - lf2) / a1;
        env.mass[2] = a1 * std::exp(lf2) / (lf1 - lf2);
    } else {
        // f(a1) = f(2 a1) = 1/4: flat continuation up to 1.
        env.slope = 0.0;
        env.mass[2] = std::max(0.0, 1.0 - 2.0 * a1) * f1;
    }
    env.total = env.mass[0] + env.mass[1] + env.mass[2];
    return env;
}

template <class LogF>
double sample_logconcave(const LogF& log_f, const LogConcaveEnvelope& env, RngStream& rng)
{
    const double a1 = env.a1;
    for (;;) {
        ++rng.work.rejections;
        const double v1 = rng.uniform(), v2 = rng.uniform(), v3 = rng.uniform();
        double x;
        const double t = env.total * v2;
        if (t <= env.mass[0]) x = a1 * v1;
        else if (t <= env.mass[0] + env.mass[1]) x = a1 + a1 * v1;
        else if (env.slope > 0.0) x = 2.0 * a1 + std::log(1.0 / v1) / env.slope;
        else x = 2.0 * a1 + (1.0 - 2.0 * a1) * v1;
        if (x > 1.0) continue;
        if (std::log(v3) <= log_f(x) - env.log_h(x)) return x;
    }
}

// One-shot form: envelope construction plus a draw.
template <class LogF>
double sample_logconcave(const LogF& log_f, RngStream& rng)
{
    const auto env = logconcave_envelope(log_f, &rng.work);
    return sample_logconcave(log_f, env, rng);
}

}  // namespace subpass
