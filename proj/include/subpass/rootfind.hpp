#pragma once

// Guarded Newton-Raphson (bisection into a certified quadratic-convergence
// basin, then Newton), Householder order-4 iteration, and the specific
// inverters needed by the undershoot sampler.

#include <algorithm>
#include <cmath>
#include <limits>

#include "params.hpp"
#include "rng.hpp"
#include "zolotarev.hpp"

namespace subpass {

struct RootResult {
    double root = 0.0;
    int bisection_steps = 0;
    int newton_steps = 0;
    bool basin_certified = false;   // false when bisection alone reached the precision
    double basin_x0 = 0.0;          // start of the Newton phase
    double basin_radius = 0.0;      // bracket radius at that start
};

namespace detail {

inline double root_tolerance(double x, const Precision& prec)
{
    const double rel = std::max(prec.tolerance(), 4.0 * std::numeric_limits<double>::epsilon());
    return std::max(rel * std::fabs(x), std::numeric_limits<double>::denorm_min());
}

}  // namespace detail

// Root of an increasing f on [lo, hi]. The bisection starts at x0 = hi and
// moves left by (hi - lo) 2^-k while f stays positive, until the bracket
// radius rad = (hi - lo) 2^(1-k) satisfies rad * M(x0, rad) < 1/2. Newton then
// runs until successive iterates differ by at most 2^-N relative.
// aux(x0, rad) must bound (1/2) sup|f''| / inf|f'| over [x*, x0] whenever x* >= x0 - rad.
template <class F, class FP, class Aux>
RootResult nr_invert(const F& f, const FP& fp, const Aux& aux, double lo, double hi,
                     const Precision& prec = {}, WorkCounters* wc = nullptr)
{
    require(hi > lo, "nr_invert requires a nonempty interval");
    const double width = hi - lo;
    const double f_lo = f(lo), f_hi = f(hi);
    if (std::isnan(f_lo) || std::isnan(f_hi)) throw NumericFailure("nr_invert: objective is NaN at an endpoint");
    if (f_lo > 0.0 || f_hi < 0.0) throw std::domain_error("nr_invert: no sign change on the interval");

    RootResult res;
    double x0 = hi;
    int k = 1;
    for (;;) {
        const double step = std::ldexp(width, -k);
        const double fx = f(x0 - step);
        if (std::isnan(fx)) throw NumericFailure("nr_invert: objective is NaN during bisection");
        if (fx > 0.0) x0 -= step;
        ++k;
        ++res.bisection_steps;
        if (wc) ++wc->bisections;
        const double rad = std::ldexp(width, 1 - k);
        const double m = aux(x0, rad);
        if (rad * m < 0.5) {
            res.basin_certified = true;
            res.basin_x0 = x0;
            res.basin_radius = rad;
            break;
        }
        if (rad <= detail::root_tolerance(x0, prec)) {
            res.root = x0;
            return res;
        }
        if (k > 1100) throw NumericFailure("nr_invert: basin condition never met");
    }
    const double bracket_lo = std::max(lo, x0 - std::ldexp(width, 1 - k));
    double x = x0;
    double prev_dx = std::numeric_limits<double>::infinity();
    for (;;) {
        const double fx = f(x), d = fp(x);
        if (!(d > 0.0) || std::isnan(fx)) throw NumericFailure("nr_invert: derivative not positive in Newton phase");
        double xn = x - fx / d;
        xn = std::min(std::max(xn, bracket_lo), x0);
        ++res.newton_steps;
        if (wc) ++wc->newton;
        const double dx = std::fabs(xn - x);
        // Inside the basin the steps shrink quadratically; a step that does not
        // shrink means the iteration has reached the rounding noise of f.
        if (dx >= prev_dx && res.newton_steps > 2) break;
        x = xn;
        if (dx <= detail::root_tolerance(x, prec)) break;
        prev_dx = dx;
        if (res.newton_steps > 200) throw NumericFailure("nr_invert: Newton phase did not converge");
    }
    res.root = x;
    return res;
}

// Values f, f', ..., f'''' of the objective at a point.
struct Derivs4 {
    double f, d1, d2, d3, d4;
};

// Householder step of order 4: x + 4 g_3(x) / g_4(x), g_m = (1/f)^(m).
inline double householder4_step(const Derivs4& v)
{
    const double f = v.f, a = v.d1, b = v.d2, c = v.d3, d = v.d4;
    if (f == 0.0) return 0.0;
    const double num = f * (-6.0 * a * a * a + 6.0 * f * a * b - f * f * c);
    const double den = 24.0 * a * a * a * a - 36.0 * f * a * a * b + 6.0 * f * f * b * b +
                       8.0 * f * f * a * c - f * f * f * d;
    return 4.0 * num / den;
}

// Householder-4 iteration from x0 for an increasing objective on [lo, hi].
// A step that leaves the current sign bracket is replaced by bisection, and so
// is a step that neither shrinks below half the previous one nor follows a
// halving of the bracket over the last two steps. The bracket thus halves at
// least every other step, also from a start deep in a flat tail of f.
template <class Eval>
RootResult householder4_invert(const Eval& eval, double x0, double lo, double hi, const Precision& prec = {},
                               WorkCounters* wc = nullptr)
{
    require(hi > lo, "householder4_invert requires a nonempty interval");
    RootResult res;
    double a = lo, b = hi;
    double x = std::min(std::max(x0, lo), hi);
    const int cap = 4 * std::max(prec.bits, 64);
    double w_prev = hi - lo, w_prev2 = std::numeric_limits<double>::infinity();
    double prev_dx = std::numeric_limits<double>::infinity();
    for (;;) {
        const Derivs4 v = eval(x);
        if (std::isnan(v.f)) throw NumericFailure("householder4_invert: objective is NaN");
        if (v.f == 0.0) break;
        (v.f < 0.0 ? a : b) = x;
        const double w = b - a;
        const bool bracket_stalled = w > 0.5 * w_prev2;
        w_prev2 = w_prev;
        w_prev = w;
        double xn = x + householder4_step(v);
        // A step below the tolerance has converged even if rounding puts it
        // on or past a bracket end; bisecting there would crawl one bit per step.
        if (std::fabs(xn - x) <= detail::root_tolerance(x, prec)) {
            x = std::clamp(xn, a, b);
            ++res.newton_steps;
            if (wc) ++wc->newton;
            break;
        }
        const bool slow = bracket_stalled && std::fabs(xn - x) > 0.5 * prev_dx;
        if (slow || !(xn > a && xn < b)) {
            xn = 0.5 * (a + b);
            ++res.bisection_steps;
            if (wc) ++wc->bisections;
        } else {
            ++res.newton_steps;
            if (wc) ++wc->newton;
        }
        const double dx = std::fabs(xn - x);
        x = xn;
        if (dx <= detail::root_tolerance(x, prec) || b - a <= detail::root_tolerance(x, prec)) break;
        prev_dx = dx;
        if (res.newton_steps + res.bisection_steps > cap)
            throw NumericFailure("householder4_invert: no convergence within the step cap");
    }
    res.root = x;
    return res;
}

namespace detail {

// Auxiliary bound for objectives with the curvature of log sigma (or log rho).
inline double sigma_aux(double alpha, double x0, double rad, double lower)
{
    const double xl = std::max(x0 - rad, lower);
    if (!(xl > 0.0) || !(x0 < 1.0)) return std::numeric_limits<double>::infinity();
    return 1.0 / (2.0 * kPi * alpha * (1.0 - alpha) * xl * x0 * x0 * (1.0 - x0) * (1.0 - x0));
}

}  // namespace detail

// z in (0,1) with log sigma(z) = log_target. Requires log_target > log sigma(0+).
inline RootResult invert_log_sigma(double alpha, double log_target, const Precision& prec = {},
                                   WorkCounters* wc = nullptr)
{
    require(log_target > log_sigma0(alpha),
            "invert_sigma: target must exceed sigma(0+); the caller takes z = 0 otherwise");
    auto f = [&](double x) {
        if (x <= 0.0) return -std::numeric_limits<double>::infinity();
        if (x >= 1.0) return std::numeric_limits<double>::infinity();
        return log_sigma(x, alpha) - log_target;
    };
    auto fp = [&](double x) { return dlog_sigma(x, alpha, 1); };
    auto aux = [&](double x0, double rad) { return detail::sigma_aux(alpha, x0, rad, 0.0); };
    return nr_invert(f, fp, aux, 0.0, 1.0, prec, wc);
}

inline double invert_sigma(double alpha, double target, const Precision& prec = {}, WorkCounters* wc = nullptr)
{
    require(target > 0.0, "invert_sigma: target must be positive");
    return invert_log_sigma(alpha, std::log(target), prec, wc).root;
}

// u in (0, z*) with u sigma(u)^alpha = y z* sigma(z*)^alpha, for 0 < z* <= 1/2.
inline RootResult invert_u_sigma_alpha_result(double alpha, double z_star, double y, const Precision& prec = {},
                                              WorkCounters* wc = nullptr)
{
    require(z_star > 0.0 && z_star <= 0.5, "invert_u_sigma_alpha requires 0 < z* <= 1/2");
    require(y > 0.0 && y < 1.0, "invert_u_sigma_alpha requires y in (0,1)");
    const double ls_star = log_sigma(z_star, alpha);
    const double target = y * z_star;
    auto f = [&](double u) {
        if (u <= 0.0) return -target;
        return u * std::exp(alpha * (log_sigma(u, alpha) - ls_star)) - target;
    };
    auto fp = [&](double u) {
        return std::exp(alpha * (log_sigma(u, alpha) - ls_star)) * (1.0 + alpha * u * dlog_sigma(u, alpha, 1));
    };
    const double k0 = std::exp(alpha * (log_sigma(0.5, alpha) - log_sigma0(alpha)));
    auto aux = [&](double x0, double) {
        const double l1 = dlog_sigma(x0, alpha, 1), l2 = dlog_sigma(x0, alpha, 2);
        return k0 * (1.0 + 0.5 * x0 * alpha * (l2 + alpha * l1 * l1));
    };
    return nr_invert(f, fp, aux, 0.0, z_star, prec, wc);
}

inline double invert_u_sigma_alpha(double alpha, double z_star, double y, const Precision& prec = {},
                                   WorkCounters* wc = nullptr)
{
    return invert_u_sigma_alpha_result(alpha, z_star, y, prec, wc).root;
}

// F(x) = sin(pi(1-a)) (1-r)^-1 (1-x)^(1-r) + pi a (1-a) cos(pi a) (2-r)^-1 (1-x)^(2-r), a < 1/2.
inline double f_c1(double alpha, double x)
{
    const double r = alpha / (1.0 - alpha);
    const double a = std::sin(detail::kPi * (1.0 - alpha)), b = detail::kPi * alpha * (1.0 - alpha) * std::cos(detail::kPi * alpha);
    return a / (1.0 - r) * std::pow(1.0 - x, 1.0 - r) + b / (2.0 - r) * std::pow(1.0 - x, 2.0 - r);
}

namespace detail {

// F(1/2) - F(x), evaluated without cancellation; increasing in x on [1/2, 1).
inline double c1_gap(double alpha, double x)
{
    const double r = alpha / (1.0 - alpha);
    const double a = std::sin(kPi * (1.0 - alpha)), b = kPi * alpha * (1.0 - alpha) * std::cos(kPi * alpha);
    const double l = std::log(2.0 * (1.0 - x));   // <= 0
    const double p1 = 1.0 - r, p2 = 2.0 - r;
    return a / p1 * std::pow(0.5, p1) * -std::expm1(p1 * l) + b / p2 * std::pow(0.5, p2) * -std::expm1(p2 * l);
}

inline RootResult invert_c1_gap(double alpha, double z, double gap, const Precision& prec, WorkCounters* wc)
{
    const double r = alpha / (1.0 - alpha);
    const double a = std::sin(kPi * (1.0 - alpha)), b = kPi * alpha * (1.0 - alpha) * std::cos(kPi * alpha);
    auto f = [&](double x) { return c1_gap(alpha, x) - gap; };
    auto fp = [&](double x) { return std::pow(1.0 - x, -r) * (a + b * (1.0 - x)); };
    const double m = std::pow(1.0 - z, -(r + 1.0)) * (r * a + b * (1.0 - r)) /
                     (std::pow(0.5, -r) * (a + b * (1.0 - z)));
    auto aux = [&](double, double) { return m; };
    return nr_invert(f, fp, aux, 0.5, z, prec, wc);
}

}  // namespace detail

// x in (1/2, z) with F(x) = y, for alpha < 1/2 and y in [F(z), F(1/2)].
inline double invert_F_c1(double alpha, double z, double y, const Precision& prec = {}, WorkCounters* wc = nullptr)
{
    require(alpha > 0.0 && alpha < 0.5, "invert_F_c1 requires alpha < 1/2");
    require(z > 0.5 && z < 1.0, "invert_F_c1 requires z in (1/2, 1)");
    const double f_half = f_c1(alpha, 0.5), f_z = f_c1(alpha, z);
    require(y >= f_z && y <= f_half, "invert_F_c1 requires y in [F(z), F(1/2)]");
    if (y == f_half) return 0.5;
    if (y == f_z) return z;
    return detail::invert_c1_gap(alpha, z, f_half - y, prec, wc).root;
}

// x in (1/2, z) with (F(1/2) - F(x)) = v (F(1/2) - F(z)), v in (0,1).
inline double invert_F_c1_fraction(double alpha, double z, double v, const Precision& prec = {},
                                   WorkCounters* wc = nullptr)
{
    require(v > 0.0 && v < 1.0, "invert_F_c1_fraction requires v in (0,1)");
    return detail::invert_c1_gap(alpha, z, v * detail::c1_gap(alpha, z), prec, wc).root;
}

// u in (1/2, z) with rho(u)^(r-1) = rho(1/2)^(r-1) + v (rho(z)^(r-1) - rho(1/2)^(r-1)), alpha > 1/2.
inline RootResult invert_rho_power_result(double alpha, double z, double v, const Precision& prec = {},
                                          WorkCounters* wc = nullptr)
{
    require(alpha > 0.5 && alpha < 1.0, "invert_rho_power requires alpha > 1/2");
    require(z > 0.5 && z < 1.0, "invert_rho_power requires z in (1/2, 1)");
    require(v > 0.0 && v < 1.0, "invert_rho_power requires v in (0,1)");
    const double r = alpha / (1.0 - alpha);
    const double e = r - 1.0;
    const double la = e * log_rho(0.5, alpha), lz = e * log_rho(z, alpha);
    // log(rho(1/2)^e (1 - v) + v rho(z)^e), with lz > la.
    const double lt = lz + std::log(v + (1.0 - v) * std::exp(la - lz));
    const double target = lt / e;
    auto f = [&](double x) { return log_rho(x, alpha) - target; };
    auto fp = [&](double x) { return dlog_rho(x, alpha, 1); };
    auto aux = [&](double x0, double rad) { return detail::sigma_aux(alpha, x0, rad, 0.5); };
    return nr_invert(f, fp, aux, 0.5, z, prec, wc);
}

inline double invert_rho_power(double alpha, double z, double v, const Precision& prec = {},
                               WorkCounters* wc = nullptr)
{
    return invert_rho_power_result(alpha, z, v, prec, wc).root;
}

}  // namespace subpass
