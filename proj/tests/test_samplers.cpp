#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include <subpass/logconcave.hpp>
#include <subpass/marginals.hpp>
#include <subpass/quadrature.hpp>
#include <subpass/rng.hpp>
#include <subpass/validation.hpp>
#include <subpass/variates.hpp>

using namespace subpass;

namespace {

// One-sample Kolmogorov distance against a continuous CDF.
double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf)
{
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, std::fabs((i + 1) / n - f), std::fabs(i / n - f)});
    }
    return d;
}

struct Moments {
    double mean, se;
};

Moments moments(const std::vector<double>& xs)
{
    double m = 0.0, m2 = 0.0;
    for (double x : xs) m += x;
    m /= xs.size();
    for (double x : xs) m2 += (x - m) * (x - m);
    return {m, std::sqrt(m2 / (xs.size() - 1) / xs.size())};
}

}  // namespace

TEST(Rng, SameStreamSameSequence)
{
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DistinctStreamsDiffer)
{
    std::set<std::uint64_t> firsts;
    for (std::uint64_t id = 0; id < 1000; ++id) firsts.insert(RngStream(42, id).next_u64());
    EXPECT_EQ(firsts.size(), 1000u);
    RngStream root(3, 0);
    EXPECT_NE(root.split(0).next_u64(), root.split(1).next_u64());
    RngStream copy = root;
    EXPECT_EQ(root.split(5).next_u64(), copy.split(5).next_u64());
}

TEST(Rng, StreamsAreUncorrelated)
{
    RngStream a(1, 0), b(1, 1);
    const int n = 100000;
    double sab = 0.0;
    for (int i = 0; i < n; ++i) sab += (a.uniform() - 0.5) * (b.uniform() - 0.5);
    // Correlation estimate with standard error 1/sqrt(n).
    EXPECT_LT(std::fabs(12.0 * sab / n), 4.0 / std::sqrt(n));
}

TEST(Uniform, OpenIntervalAndCounted)
{
    RngStream rng(5, 0);
    for (int i = 0; i < 100000; ++i) {
        const double u = sample_uniform(rng);
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
    EXPECT_EQ(rng.work.uniforms, 100000u);
}

TEST(Exponential, InjectedUniform)
{
    EXPECT_NEAR(exponential_from_uniform(std::exp(-1.0)), 1.0, 1e-15);
}

TEST(Gamma, ShapeOneIsExponential)
{
    RngStream rng(11, 0), ref(11, 1);
    std::vector<double> g(10000), e(10000);
    for (auto& x : g) x = sample_gamma(1.0, 1.0, rng);
    for (auto& x : e) x = sample_exponential(ref);
    EXPECT_TRUE(ks_two_sample(g, e).passes(0.001));
}

TEST(Gamma, SmallShapeMean)
{
    RngStream rng(12, 0);
    std::vector<double> g(100000);
    for (auto& x : g) x = sample_gamma(0.3, 1.0, rng);
    const auto m = moments(g);
    EXPECT_LT(std::fabs(m.mean - 0.3), 3.0 * m.se);
}

TEST(Gamma, TinyShapeStaysInLogs)
{
    RngStream rng(13, 0);
    for (int i = 0; i < 1000; ++i) ASSERT_TRUE(std::isfinite(sample_log_gamma(1e-4, rng)));
    EXPECT_THROW(sample_gamma(0.0, 1.0, rng), std::domain_error);
}

TEST(TruncatedNormal, SupportAndShape)
{
    RngStream rng(14, 0);
    const double scale = 0.4;
    std::vector<double> xs(10000);
    for (auto& x : xs) {
        x = sample_truncated_normal(scale, rng);
        ASSERT_GE(x, 0.0);
        ASSERT_LE(x, 1.0);
    }
    const double k = 1.0 / (std::sqrt(2.0) * scale);
    const double d = ks_distance(xs, [&](double x) { return std::erf(k * x) / std::erf(k); });
    EXPECT_LT(d, 1.95 / std::sqrt(10000.0));
}

TEST(Normal, Moments)
{
    RngStream rng(15, 0);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = sample_normal(rng);
    const auto m = moments(xs);
    EXPECT_LT(std::fabs(m.mean), 3.0 * m.se);
    double v = 0.0;
    for (double x : xs) v += x * x;
    EXPECT_NEAR(v / xs.size(), 1.0, 0.02);
}

TEST(Stable, InjectedDraws)
{
    EXPECT_NEAR(stable_from_uniforms(StableParams(0.5, 1.0), 1.0, 0.5, 1.0), 0.5, 1e-15);
}

TEST(Stable, InverseMoment)
{
    const StableParams p(0.5, 1.0);
    RngStream rng(16, 0);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = 1.0 / sample_stable(p, 1.0, rng);
    const auto m = moments(xs);
    EXPECT_LT(std::fabs(m.mean - 2.0), 3.0 * m.se);
}

TEST(Stable, KsAgainstQuadratureCdf)
{
    for (double a : {0.3, 0.7}) {
        const StableParams p(a, 1.5);
        RngStream rng(17, 0);
        std::vector<double> xs(10000);
        for (auto& x : xs) x = sample_stable(p, 0.8, rng);
        const double d = ks_distance(xs, [&](double x) { return stable_cdf(x, 0.8, p); });
        EXPECT_LT(d, 1.63 / std::sqrt(10000.0)) << a;
    }
}

TEST(Tempered, QZeroUsesTheStablePath)
{
    const TemperedParams tp(0.6, 1.3, 0.0);
    RngStream a(18, 0), b(18, 0);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(sample_tempered_stable(tp, 0.7, a), sample_stable(tp.base, 0.7, b));
}

TEST(Tempered, LaplaceTransform)
{
    const TemperedParams tp(0.7, 1.0, 2.0);
    RngStream rng(19, 0);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = sample_tempered_stable(tp, 1.0, rng);
    for (double u : {0.5, 1.0, 2.0}) {
        std::vector<double> ys(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = std::exp(-u * xs[i]);
        const auto m = moments(ys);
        const double exact = std::exp((std::pow(2.0, 0.7) - std::pow(u + 2.0, 0.7)) * 1.0);
        EXPECT_LT(std::fabs(m.mean - exact), 3.0 * m.se) << u;
    }
}

TEST(Tempered, RejectionIterationsBounded)
{
    for (double a : {0.1, 0.5, 0.9})
        for (double q : {0.1, 1.0, 10.0}) {
            const TemperedParams tp(a, 1.0, q);
            RngStream rng(20, 0);
            double total = 0.0;
            const int n = 10000;
            for (int i = 0; i < n; ++i) {
                std::uint64_t it = 0;
                sample_log_tempered_stable(tp, 1.0, rng, &it);
                total += static_cast<double>(it);
            }
            EXPECT_LE(total / n, 4.2154 * 1.1) << a << ' ' << q;
        }
}

TEST(Tempered, BranchIsAFunctionOfParameters)
{
    for (double a : {0.2, 0.8})
        for (double xi : {1e-3, 1.0, 1e3}) {
            const int b = tempered_branch(a, xi);
            EXPECT_GE(b, 1);
            EXPECT_LE(b, 4);
            EXPECT_EQ(b, tempered_branch(a, xi));
        }
}

TEST(LogConcave, UniformDensity)
{
    RngStream rng(21, 0), ref(21, 1);
    auto logf = [](double) { return 0.0; };
    std::vector<double> xs(10000), us(10000);
    for (auto& x : xs) x = sample_logconcave(logf, rng);
    for (auto& u : us) u = ref.uniform();
    EXPECT_TRUE(ks_two_sample(xs, us).passes(0.001));
}

TEST(LogConcave, TruncatedExponential)
{
    RngStream rng(22, 0);
    auto logf = [](double x) { return -5.0 * x; };
    const auto env = logconcave_envelope(logf);
    const std::uint64_t before = rng.work.rejections;
    std::vector<double> xs(10000);
    for (auto& x : xs) x = sample_logconcave(logf, env, rng);
    const double d = ks_distance(xs, [](double x) { return -std::expm1(-5.0 * x) / -std::expm1(-5.0); });
    EXPECT_LT(d, 1.95 / std::sqrt(10000.0));
    const double mean_iterations = static_cast<double>(rng.work.rejections - before) / xs.size();
    EXPECT_LE(mean_iterations, 5.0 * 1.1);
}

TEST(LogConcave, IterationBoundAcrossSteepness)
{
    for (double k : {0.1, 2.0, 30.0, 1e3, 1e6}) {
        RngStream rng(23, 0);
        auto logf = [k](double x) { return -k * x * x - k * x; };
        const auto env = logconcave_envelope(logf);
        const int n = 10000;
        for (int i = 0; i < n; ++i) sample_logconcave(logf, env, rng);
        EXPECT_LE(static_cast<double>(rng.work.rejections) / n, 5.0 * 1.1) << k;
    }
}

TEST(LogConcave, RequiresNormalForm)
{
    RngStream rng(24, 0);
    auto logf = [](double x) { return 1.0 - x; };
    EXPECT_THROW(sample_logconcave(logf, rng), std::domain_error);
}
