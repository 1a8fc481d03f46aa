#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <subpass/bv_levy.hpp>
#include <subpass/validation.hpp>

using namespace subpass;

namespace {

BVProcessSpec process(double qm_theta = 0.0615)
{
    return BVProcessSpec(TemperedParams(0.66, 0.1305, 6.5022), TemperedParams(0.66, qm_theta, 3.3088));
}

}  // namespace

TEST(BvProcess, DriftMustBeZero)
{
    EXPECT_THROW(BVProcessSpec(TemperedParams(0.5, 1.0, 1.0), TemperedParams(0.5, 1.0, 1.0), 0.1), std::domain_error);
    RngStream rng(1, 0);
    EXPECT_THROW(bvfp_sample(process(), 0.0, 1.0, rng), std::domain_error);
    EXPECT_THROW(bvfp_sample(process(), 1.0, INFINITY, rng), std::domain_error);
}

TEST(BvPassage, TripletConsistency)
{
    const auto spec = process();
    RngStream rng(2, 0);
    const double c = 0.04, T = 30.0 / 365.0;
    int horizon = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto r = bvfp_sample(spec, c, T, rng);
        ASSERT_LE(r.time, T);
        if (r.stopped_by_horizon) {
            ++horizon;
            ASSERT_EQ(r.time, T);
            ASSERT_EQ(r.left_limit, r.value);
            ASSERT_LT(r.value, c);
        } else {
            ASSERT_LT(r.left_limit, c);
            ASSERT_GE(r.value, c);
        }
    }
    EXPECT_GT(horizon, 0);
    EXPECT_LT(horizon, 2000);
}

TEST(BvPassage, HighLevelShortHorizonStopsAtHorizon)
{
    const auto spec = process();
    RngStream rng(3, 0);
    int horizon = 0;
    for (int i = 0; i < 500; ++i) horizon += bvfp_sample(spec, 5.0, 1e-3, rng).stopped_by_horizon;
    EXPECT_GE(horizon, 495);
}

TEST(BvPassage, NegligibleDownwardPartMatchesSubordinator)
{
    // theta- -> 0: Z is Z+ and the passage time is that of the subordinator.
    const TemperedParams plus(0.5, 1.0, 1.0);
    const BVProcessSpec spec(plus, TemperedParams(0.5, 1e-9, 1.0));
    RngStream r1(4, 0), r2(4, 1);
    const int n = 3000;
    std::vector<double> a(n), b(n);
    for (auto& t : a) t = bvfp_sample(spec, 1.0, 1e6, r1).time;
    for (auto& t : b) t = tsffp_sample(plus, Boundary::constant(1.0), r2).tau;
    EXPECT_TRUE(ks_two_sample(a, b).passes(0.001));
}

TEST(BvPassage, ContinuationIsMonotoneInTheLevel)
{
    const auto spec = process();
    RngStream rng(5, 0);
    for (int i = 0; i < 500; ++i) {
        double t = 0.0, z = 0.0;
        for (double c : {0.01, 0.02, 0.05}) {
            if (z >= c) continue;
            const auto r = bvfp_continue(spec, c, 0.25, t, z, rng);
            ASSERT_GE(r.time, t);
            t = r.time;
            z = r.value;
            if (r.stopped_by_horizon) break;
        }
    }
}

TEST(BvPassage, CrossingProbabilityDecreasesWithLevel)
{
    const auto spec = process();
    double prev = 1.0;
    for (double c : {0.005, 0.02, 0.08}) {
        RngStream rng(6, 0);
        int crossed = 0;
        for (int i = 0; i < 2000; ++i) crossed += !bvfp_sample(spec, c, 30.0 / 365.0, rng).stopped_by_horizon;
        const double p = crossed / 2000.0;
        EXPECT_LT(p, prev) << c;
        prev = p;
    }
}

TEST(ExpMoment, BoundHoldsForSubordinatorPassage)
{
    const TemperedParams tp(0.5, 1.0, 1.0);
    const double c = 1.0, u = 1.0;
    const double psi = tempered_laplace_exponent(tp, u);
    EXPECT_NEAR(psi, std::sqrt(2.0) - 1.0, 1e-15);
    EXPECT_GE(exp_moment_bound(tp, c, 0.0, u), 1.0);
    const double p = 0.5 * psi;
    RngStream rng(7, 0);
    double m = 0.0, mt = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double tau = tsffp_sample(tp, Boundary::constant(c), rng).tau;
        m += std::exp(p * tau);
        mt += tau;
    }
    EXPECT_LE(m / n, exp_moment_bound(tp, c, p, u));
    EXPECT_LE(mt / n, std::exp(u * c) / psi);
    EXPECT_THROW(exp_moment_bound(tp, c, psi, u), std::domain_error);
}
