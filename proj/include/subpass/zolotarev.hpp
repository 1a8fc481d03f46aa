#pragma once

// Trigonometric kernel of the Zolotarev representation of one-sided stable laws:
//   rho(u)   = sin(a pi u)^a sin((1-a) pi u)^(1-a) / sin(pi u),   u in (0,1)
//   sigma(u) = rho(u)^(1/(1-a))
// together with derivatives of log sigma, the Levy tail and Mellin moments.

#include <array>
#include <cmath>
#include <numbers>

#include "params.hpp"

namespace subpass {

namespace detail {

inline constexpr double kPi = std::numbers::pi;

// Coefficients c_k of cot x = 1/x - sum_k c_k x^(2k-1).
inline constexpr std::array<double, 8> kCot = {
    1.0 / 3.0,          1.0 / 45.0,         2.0 / 945.0,           1.0 / 4725.0,
    2.0 / 93555.0,      1382.0 / 638512875.0, 4.0 / 18243225.0, 3617.0 / 162820783125.0};

// Coefficients d_k of log(sin x / x) = -sum_k d_k x^(2k).
inline constexpr std::array<double, 8> kLogSinc = {
    1.0 / 6.0,     1.0 / 180.0,           1.0 / 2835.0,        1.0 / 37800.0,
    1.0 / 467775.0, 691.0 / 3831077250.0, 2.0 / 127702575.0, 3617.0 / 2605132530000.0};

inline constexpr double kSeriesCut = 0.3;  // series used for pi*u below this

// sin(pi x) for x in (0,1) given xc = 1 - x evaluated accurately by the caller.
inline double sinpi(double x, double xc) { return std::sin(kPi * (x < xc ? x : xc)); }

// log(sin(pi x) / (pi x)).
inline double log_sinc_pi(double x, double xc)
{
    const double y = kPi * x;
    if (y < kSeriesCut) {
        const double y2 = y * y;
        double acc = 0.0;
        for (int k = 7; k >= 0; --k) acc = acc * y2 + kLogSinc[k];
        return -acc * y2;
    }
    return std::log(sinpi(x, xc)) - std::log(y);
}

// alpha^m + (1-alpha)^m - 1 for odd m >= 3 (always negative).
inline double moment_gap(double a, double am, int m)
{
    return std::pow(a, m) + std::pow(am, m) - 1.0;
}

struct Angles {
    double a, am;        // alpha, 1 - alpha
    double x1, x1c;      // alpha u and its complement
    double x2, x2c;      // (1 - alpha) u and its complement
    double x3, x3c;      // u and 1 - u
};

// uc = 1 - u, supplied separately so that points near 1 keep full precision.
inline Angles angles(double u, double uc, double a)
{
    const double am = 1.0 - a;
    return {a, am, a * u, am + a * uc, am * u, a + am * uc, u, uc};
}

inline Angles angles(double u, double a) { return angles(u, 1.0 - u, a); }

inline double cot_pi(double x, double xc) { return std::cos(kPi * x) / sinpi(x, xc); }
inline double csc2_pi(double x, double xc)
{
    const double s = sinpi(x, xc);
    return 1.0 / (s * s);
}

// A_n(u) = d^n/dx^n [a^2 cot(a x) + (1-a)^2 cot((1-a) x) - cot x] / x-derivatives, x = pi u,
// so that (log rho)^(n) = pi^n A_{n}. order in {1,2,3}.
inline double log_rho_derivative_core(double u, double a, int order)
{
    const Angles g = angles(u, a);
    const double x = kPi * u;
    if (x < kSeriesCut) {
        double acc = 0.0;
        for (int k = 1; k <= 8; ++k) {
            const double c = kCot[k - 1] * moment_gap(a, g.am, 2 * k + 1);
            const int p = 2 * k - 1;
            if (order == 1) acc -= c * std::pow(x, p);
            else if (order == 2) acc -= c * p * std::pow(x, p - 1);
            else if (k >= 2) acc -= c * p * (p - 1) * std::pow(x, p - 2);
        }
        return acc;
    }
    const double a2 = a * a, b2 = g.am * g.am;
    if (order == 1)
        return a2 * cot_pi(g.x1, g.x1c) + b2 * cot_pi(g.x2, g.x2c) - cot_pi(g.x3, g.x3c);
    if (order == 2)
        return -a2 * a * csc2_pi(g.x1, g.x1c) - b2 * g.am * csc2_pi(g.x2, g.x2c) +
               csc2_pi(g.x3, g.x3c);
    return 2.0 * a2 * a2 * csc2_pi(g.x1, g.x1c) * cot_pi(g.x1, g.x1c) +
           2.0 * b2 * b2 * csc2_pi(g.x2, g.x2c) * cot_pi(g.x2, g.x2c) -
           2.0 * csc2_pi(g.x3, g.x3c) * cot_pi(g.x3, g.x3c);
}

inline void check_unit(double u)
{
    require(u > 0.0 && u < 1.0, "argument u must lie in (0,1)");
}

}  // namespace detail

// log rho(0+) = a log a + (1-a) log(1-a).
inline double log_rho0(double alpha)
{
    return alpha * std::log(alpha) + (1.0 - alpha) * std::log1p(-alpha);
}

// log sigma(0+) = log((1-a) a^(a/(1-a))).
inline double log_sigma0(double alpha) { return log_rho0(alpha) / (1.0 - alpha); }
inline double sigma0(double alpha) { return std::exp(log_sigma0(alpha)); }

// log rho(u) - log rho(0+), accurate for small u; uc = 1 - u.
inline double log_rho_excess(double u, double uc, double alpha)
{
    require(u > 0.0 && uc > 0.0, "argument u must lie in (0,1)");
    const auto g = detail::angles(u, uc, alpha);
    return alpha * detail::log_sinc_pi(g.x1, g.x1c) + g.am * detail::log_sinc_pi(g.x2, g.x2c) -
           detail::log_sinc_pi(g.x3, g.x3c);
}

inline double log_rho_excess(double u, double alpha)
{
    detail::check_unit(u);
    return log_rho_excess(u, 1.0 - u, alpha);
}

inline double log_rho(double u, double alpha) { return log_rho0(alpha) + log_rho_excess(u, alpha); }

inline double rho(double u, double alpha)
{
    detail::check_unit(u);
    const auto g = detail::angles(u, alpha);
    return std::pow(detail::sinpi(g.x1, g.x1c), alpha) * std::pow(detail::sinpi(g.x2, g.x2c), g.am) /
           detail::sinpi(g.x3, g.x3c);
}

inline double log_sigma(double u, double alpha) { return log_rho(u, alpha) / (1.0 - alpha); }

inline double log_sigma(double u, double uc, double alpha)
{
    return (log_rho0(alpha) + log_rho_excess(u, uc, alpha)) / (1.0 - alpha);
}

// True when sigma is evaluated through exp(log sigma) rather than a power of rho.
inline bool sigma_uses_log_path(double alpha) { return (1.0 - alpha) < 0x1.0p-6; }

inline double sigma(double u, double alpha)
{
    if (!sigma_uses_log_path(alpha)) {
        const double v = std::pow(rho(u, alpha), 1.0 / (1.0 - alpha));
        if (std::isfinite(v) && v > 0.0) return v;
    }
    return std::exp(log_sigma(u, alpha));
}

// log sigma at u in [0,1), with the limit value at u = 0.
inline double log_sigma_closed(double u, double alpha)
{
    return u == 0.0 ? log_sigma0(alpha) : log_sigma(u, alpha);
}

// sigma(u) - sigma(0+), without cancellation near 0.
inline double sigma_excess(double u, double alpha)
{
    if (u == 0.0) return 0.0;
    return sigma0(alpha) * std::expm1(log_rho_excess(u, alpha) / (1.0 - alpha));
}

inline double sigma_excess(double u, double uc, double alpha)
{
    if (u == 0.0) return 0.0;
    return sigma0(alpha) * std::expm1(log_rho_excess(u, uc, alpha) / (1.0 - alpha));
}

// n-th derivative (n = 1, 2, 3) of log rho.
inline double dlog_rho(double u, double alpha, int order = 1)
{
    detail::check_unit(u);
    require(order >= 1 && order <= 3, "derivative order must be 1, 2 or 3");
    return std::pow(detail::kPi, order) * detail::log_rho_derivative_core(u, alpha, order);
}

// n-th derivative of log sigma = (r + 1) log rho.
inline double dlog_sigma(double u, double alpha, int order = 1)
{
    return dlog_rho(u, alpha, order) / (1.0 - alpha);
}

inline double sigma_prime(double u, double alpha) { return sigma(u, alpha) * dlog_sigma(u, alpha, 1); }

inline double sigma_second(double u, double alpha)
{
    const double l1 = dlog_sigma(u, alpha, 1);
    return sigma(u, alpha) * (dlog_sigma(u, alpha, 2) + l1 * l1);
}

inline double rho_prime(double u, double alpha) { return rho(u, alpha) * dlog_rho(u, alpha, 1); }

// Tail of the stable Levy measure: nu((x, inf)) = theta x^(-alpha) / Gamma(1 - alpha).
inline double levy_tail(double x, const StableParams& p)
{
    require(x > 0.0, "levy_tail requires x > 0");
    return p.theta * std::pow(x, -p.alpha) / std::tgamma(1.0 - p.alpha);
}

// E[S_t^eta] = (t theta)^(eta/alpha) Gamma(1 - eta/alpha) / Gamma(1 - eta), eta < alpha.
inline double mellin_moment(double eta, double t, const StableParams& p)
{
    require(eta < p.alpha, "mellin_moment requires eta < alpha (moment is infinite otherwise)");
    require(t > 0.0, "mellin_moment requires t > 0");
    const double e = eta / p.alpha;
    // Both Gamma arguments exceed 0 since eta < alpha < 1.
    return std::exp(e * std::log(t * p.theta) + std::lgamma(1.0 - e) - std::lgamma(1.0 - eta));
}

}  // namespace subpass
