// Draws a few first-passage triplets and prints the mean crossing time next to
// its closed form for a stable subordinator over a constant barrier.

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include <subpass/subpass.hpp>

int main()
{
    using namespace subpass;
    const double inf = std::numeric_limits<double>::infinity();

    RngStream rng(2024, 0);
    const StableParams stable(0.5, 1.0);
    const Boundary flat = Boundary::constant(1.0);
    for (int i = 0; i < 5; ++i) {
        const PassageTriplet x = sfp_sample(stable, flat, inf, rng);
        std::printf("tau=%.6f  S(tau-)=%.6f  S(tau)=%.6f\n", x.tau, x.pre, x.post);
    }

    // E[tau] = b^alpha / (theta Gamma(1 + alpha)) for a constant level b.
    const int n = 20000;
    RunningMean m;
    for (int i = 0; i < n; ++i) m.add(sfp_sample(stable, flat, inf, rng).tau);
    const auto est = m.result();
    std::printf("mean tau %.5f +- %.5f, exact %.5f\n", est.estimate, est.se, 1.0 / std::tgamma(1.5));

    // Tempered case and a barrier that creeps with positive probability.
    const TemperedParams tempered(0.55, 1.0, 2.0);
    const Boundary sloped = Boundary::linear(1.0, 0.5);
    int crept = 0;
    for (int i = 0; i < 1000; ++i) crept += tsffp_sample(tempered, sloped, rng).crept;
    std::printf("tempered, b(t) = 1 - t/2: %d of 1000 crossings crept\n", crept);
    std::printf("work units spent: %.0f\n", rng.work.total());
}
