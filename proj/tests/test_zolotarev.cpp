#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include <subpass/marginals.hpp>
#include <subpass/quadrature.hpp>
#include <subpass/zolotarev.hpp>

using namespace subpass;

namespace {

using Big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;

// The defining trig expression evaluated with 200 decimal digits.
double rho_reference(double u, double a)
{
    const Big pi = boost::multiprecision::atan(Big(1)) * 4;
    const Big bu(u), ba(a);
    const Big v = boost::multiprecision::pow(boost::multiprecision::sin(ba * pi * bu), ba) *
                  boost::multiprecision::pow(boost::multiprecision::sin((1 - ba) * pi * bu), 1 - ba) /
                  boost::multiprecision::sin(pi * bu);
    return static_cast<double>(v);
}

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

TEST(Params, DerivedQuantities)
{
    const StableParams p(0.3, 2.0);
    EXPECT_NEAR(p.r() / p.alpha, p.r() + 1.0, 1e-14);
    EXPECT_NEAR(p.w_alpha(), std::tgamma(0.7) / 0.3, 1e-14);
    EXPECT_THROW(StableParams(1.2), std::domain_error);
    EXPECT_THROW(StableParams(0.0), std::domain_error);
    EXPECT_THROW(StableParams(0.5, -1.0), std::domain_error);
    EXPECT_THROW(TemperedParams(0.5, 1.0, -0.1), std::domain_error);
    EXPECT_THROW(Precision(0), std::domain_error);
}

TEST(Rho, HalfHalfIsSqrtTwoOverTwo)
{
    EXPECT_NEAR(rho(0.5, 0.5), std::numbers::sqrt2 / 2.0, 1e-15);
}

TEST(Rho, LimitAtZero)
{
    for (double a : {0.1, 0.5, 0.9}) {
        const double lim = std::pow(a, a) * std::pow(1.0 - a, 1.0 - a);
        EXPECT_LT(rel(rho(1e-8, a), lim), 1e-6) << a;
        EXPECT_NEAR(std::exp(log_rho0(a)), lim, 1e-15);
    }
}

TEST(Rho, MatchesHighPrecision)
{
    EXPECT_LT(rel(rho(0.3, 0.7), rho_reference(0.3, 0.7)), 4e-16);
    for (double a : {0.05, 0.3, 0.5, 0.8, 0.97})
        for (double u : {1e-6, 0.01, 0.2, 0.5, 0.75, 0.99, 0.999999})
            EXPECT_LT(rel(rho(u, a), rho_reference(u, a)), 2e-14) << a << ' ' << u;
}

TEST(Rho, LogFormAgreesWithinFewUlp)
{
    for (double a : {0.2, 0.5, 0.8})
        for (double u : {0.01, 0.1, 0.4, 0.6, 0.9}) {
            const double direct = rho(u, a), via_log = std::exp(log_rho(u, a));
            EXPECT_LE(std::fabs(direct - via_log), 4.0 * std::nextafter(direct, 2.0 * direct) - 4.0 * direct)
                << a << ' ' << u;
        }
}

TEST(Rho, DomainErrors)
{
    EXPECT_THROW(rho(0.0, 0.5), std::domain_error);
    EXPECT_THROW(rho(1.0, 0.5), std::domain_error);
    EXPECT_THROW(sigma(-0.1, 0.5), std::domain_error);
}

TEST(Sigma, KnownValues)
{
    EXPECT_NEAR(sigma(0.5, 0.5), 0.5, 1e-15);
    for (double a : {0.1, 0.5, 0.9}) {
        const double lim = (1.0 - a) * std::pow(a, a / (1.0 - a));
        EXPECT_NEAR(sigma0(a), lim, 1e-15 * lim);
        EXPECT_LT(rel(sigma(1e-7, a), lim), 1e-9);
    }
}

TEST(Sigma, DerivativeMatchesCentralDifference)
{
    const double a = 0.85, u = 0.9, h = 1e-6;
    const double fd = (sigma(u + h, a) - sigma(u - h, a)) / (2.0 * h);
    EXPECT_LT(rel(sigma_prime(u, a), fd), 1e-6);
    const double fd2 = (sigma_prime(u + h, a) - sigma_prime(u - h, a)) / (2.0 * h);
    EXPECT_LT(rel(sigma_second(u, a), fd2), 1e-5);
    for (double aa : {0.1, 0.5}) {
        for (double uu : {0.2, 0.6}) {
            const double d3 = (dlog_sigma(uu + h, aa, 2) - dlog_sigma(uu - h, aa, 2)) / (2.0 * h);
            EXPECT_LT(rel(dlog_sigma(uu, aa, 3), d3), 1e-5);
        }
    }
}

TEST(Sigma, LogPathNearOne)
{
    const double a = 1.0 - std::ldexp(1.0, -8);
    EXPECT_TRUE(sigma_uses_log_path(a));
    EXPECT_FALSE(sigma_uses_log_path(0.9));
    // r = 255: sigma(0.99) is astronomically large but its log is finite.
    const double ls = log_sigma(0.99, a);
    EXPECT_TRUE(std::isfinite(ls));
    EXPECT_NEAR(ls, std::log(rho_reference(0.99, a)) / (1.0 - a), 1e-9 * std::fabs(ls));
    EXPECT_TRUE(std::isinf(sigma(0.999999, a)) || sigma(0.999999, a) > 1e300);
}

TEST(Sigma, ExcessAvoidsCancellation)
{
    const double a = 0.4, u = 1e-6;
    // sigma - sigma(0+) ~ sigma(0+) pi^2 a u^2 / 2 for small u.
    const double lead = sigma0(a) * std::numbers::pi * std::numbers::pi * a * u * u / 2.0;
    EXPECT_LT(rel(sigma_excess(u, a), lead), 1e-5);
}

TEST(PhiAlpha, LevyDensityAtOne)
{
    const double exact = std::exp(-0.25) / (2.0 * std::sqrt(std::numbers::pi));
    EXPECT_LT(rel(phi_alpha(1.0, 0.5), exact), 1e-12);
    for (double x : {0.01, 0.3, 4.0, 100.0}) {
        const double levy = std::pow(x, -1.5) * std::exp(-1.0 / (4.0 * x)) / (2.0 * std::sqrt(std::numbers::pi));
        EXPECT_LT(rel(phi_alpha(x, 0.5), levy), 1e-11) << x;
    }
}

TEST(PhiAlpha, VanishesAtZero)
{
    EXPECT_LT(phi_alpha(1e-4, 0.5), 1e-300);
    EXPECT_LT(phi_alpha(1e-2, 0.5), phi_alpha(1e-1, 0.5));
}

TEST(PhiAlpha, Normalised)
{
    // Integral over log x by double-exponential quadrature.
    boost::math::quadrature::sinh_sinh<double> integrator(12);
    for (double a : {0.1, 0.5, 0.9}) {
        auto f = [&](double y) {
            if (std::fabs(y) > 700.0) return 0.0;
            const double x = std::exp(y);
            return x * phi_alpha(x, a);
        };
        const double total = integrator.integrate(f, 1e-12);
        EXPECT_NEAR(total, 1.0, 1e-8) << a;
    }
}

TEST(StableCdf, LevyClosedForm)
{
    const StableParams p(0.5, 1.0);
    for (double x : {0.01, 0.2, 1.0, 7.0, 1e4})
        EXPECT_NEAR(stable_cdf(x, 1.0, p), std::erfc(1.0 / (2.0 * std::sqrt(x))), 1e-12) << x;
}

TEST(StableCdf, LimitsAndMonotone)
{
    for (double a : {0.2, 0.7}) {
        const StableParams p(a, 1.0);
        EXPECT_EQ(stable_cdf(0.0, 1.0, p), 0.0);
        EXPECT_EQ(stable_cdf(std::numeric_limits<double>::infinity(), 1.0, p), 1.0);
        EXPECT_GT(stable_cdf(1e30, 1.0, p), 1.0 - 1e-6);
        double prev = 0.0;
        for (double lx = -6.0; lx <= 6.0; lx += 0.25) {
            const double c = stable_cdf(std::exp(lx), 1.0, p);
            EXPECT_GE(c, prev);
            prev = c;
        }
    }
}

TEST(StableCdf, ScalingInTimeAndTheta)
{
    const StableParams p(0.6, 2.0), unit(0.6, 1.0);
    const double x = 1.7, t = 0.4;
    const double z = x * std::pow(2.0 * t, -1.0 / 0.6);
    EXPECT_NEAR(stable_cdf(x, t, p), stable_cdf(z, 1.0, unit), 1e-13);
    EXPECT_NEAR(stable_density(x, t, p), phi_alpha(z, 0.6) * std::pow(2.0 * t, -1.0 / 0.6), 1e-13);
}

TEST(StableCdf, NinetyNinthPercentileFromSampler)
{
    const StableParams p(0.5, 1.0);
    RngStream rng(99, 0);
    std::vector<double> xs(1000000);
    for (auto& x : xs) x = sample_stable(p, 1.0, rng);
    std::nth_element(xs.begin(), xs.begin() + 990000, xs.end());
    const double q99 = xs[990000];
    EXPECT_NEAR(stable_cdf(q99, 1.0, p), 0.99, 5e-4);
}

TEST(LevyTail, Values)
{
    EXPECT_NEAR(levy_tail(1.0, StableParams(0.5, 1.0)), 1.0 / std::sqrt(std::numbers::pi), 1e-15);
    for (double a : {0.2, 0.8}) {
        const StableParams p(a, 1.0);
        EXPECT_NEAR(levy_tail(6.0, p) / levy_tail(3.0, p), std::pow(2.0, -a), 1e-14);
        EXPECT_NEAR(levy_tail(2.0, StableParams(a, 2.0)), 2.0 * levy_tail(2.0, p), 1e-14);
    }
    EXPECT_THROW(levy_tail(0.0, StableParams(0.5)), std::domain_error);
}

TEST(Mellin, Values)
{
    const StableParams p(0.5, 1.0);
    EXPECT_NEAR(mellin_moment(0.0, 3.0, StableParams(0.3, 2.0)), 1.0, 1e-15);
    EXPECT_NEAR(mellin_moment(-1.0, 1.0, p), 2.0, 1e-14);
    EXPECT_NEAR(mellin_moment(-0.5, 1.0, p), 2.0 / std::sqrt(std::numbers::pi), 1e-14);
    EXPECT_THROW(mellin_moment(0.5, 1.0, p), std::domain_error);
    EXPECT_TRUE(std::isfinite(mellin_moment(0.49, 1.0, p)));
}
