// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <subpass/subpass.hpp>

using namespace subpass;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool within(const EstimateWithError& e, double exact, double k = 3.0)
{
    return std::fabs(e.estimate - exact) <= k * e.se;
}

// 1. Mellin moment of S_1 and mean crossing time of a constant barrier.
Outcome mean_checks()
{
    const StableParams p(0.5, 1.0);
    const int n = 100000;
    RngStream r1(101, 0), r2(101, 1);
    RunningMean inv, tau;
    for (int i = 0; i < n; ++i) inv.add(1.0 / sample_stable(p, 1.0, r1));
    const Boundary b = Boundary::constant(1.0);
    for (int i = 0; i < n; ++i) tau.add(sfp_sample(p, b, kInf, r2).tau);
    const auto a = inv.result(), t = tau.result();
    const double t_exact = 2.0 / std::sqrt(std::numbers::pi);
    return {within(a, 2.0) && within(t, t_exact),
            fmt("E[1/S1]=%.5f+-%.5f (2), E[tau]=%.5f+-%.5f (%.5f)", a.estimate, a.se, t.estimate, t.se, t_exact)};
}

// 2. Laplace transform of the tempered marginal.
Outcome tempered_laplace()
{
    const TemperedParams tp(0.7, 1.0, 2.0);
    const int n = 100000;
    RngStream rng(102, 0);
    std::vector<double> xs(n);
    for (auto& x : xs) x = sample_tempered_stable(tp, 1.0, rng);
    bool ok = true;
    std::string d;
    for (double u : {0.5, 1.0, 2.0}) {
        RunningMean m;
        for (double x : xs) m.add(std::exp(-u * x));
        const auto e = m.result();
        const double exact = std::exp(std::pow(2.0, 0.7) - std::pow(u + 2.0, 0.7));
        ok = ok && within(e, exact);
        d += fmt("u=%g: %.5f+-%.5f (%.5f) ", u, e.estimate, e.se, exact);
    }
    return {ok, d};
}

// 3. Proposal marginals against direct inversion.
Outcome proposal_ks()
{
    const auto rows = proposal_ks_suite({0.1, 0.3, 0.5, 0.7, 0.9}, 10000, 103);
    bool ok = true;
    double worst = 1.0;
    std::string failed;
    for (const auto& r : rows) {
        worst = std::min(worst, r.result.p_value);
        if (!r.result.passes(0.001)) {
            ok = false;
            failed += " [" + r.test + "]";
        }
    }
    return {ok, fmt("%zu tests, min p=%.4f", rows.size(), worst) + failed};
}

// 4. Both tempered samplers give the same crossing-time law.
Outcome sampler_consistency()
{
    const TemperedParams tp(0.55, 1.0, 2.0);
    const Boundary b = Boundary::constant(1.0);
    const int n = 10000;
    RngStream r1(104, 0), r2(104, 1);
    std::vector<double> a(n), c(n);
    for (auto& t : a) t = tsfp_sample(tp, b, r1).tau;
    for (auto& t : c) t = tsffp_sample(tp, b, r2).tau;
    const auto ks = ks_two_sample(a, c);
    return {ks.passes(0.001), fmt("D=%.5f p=%.4f", ks.statistic, ks.p_value)};
}

// 5. Deterministic inequality suite.
Outcome invariants()
{
    const auto rep = invariant_grid_suite();
    std::string failed;
    for (const auto& c : rep.checks)
        if (!c.passed) failed += " [" + c.name + "]";
    return {rep.all_passed(), fmt("%zu checks", rep.checks.size()) + failed};
}

// 6. Mean outer iterations of the undershoot sampler.
Outcome outer_iterations()
{
    bool ok = true;
    std::string d;
    for (double a : {0.5, 0.9, 0.99}) {
        const UndershootContext ctx(stable_quantile(0.5, a), a);
        RngStream rng(106, static_cast<std::uint64_t>(a * 1000));
        const int n = 1000;
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += static_cast<double>(sample_undershoot_fraction(ctx, rng).outer_iterations);
        const double bound = 2.0 / (1.0 - a) * 1.1;
        ok = ok && total / n <= bound;
        d += fmt("a=%g: %.3f<=%.1f ", a, total / n, bound);
    }
    return {ok, d};
}

// 7. Creeping: never for a constant barrier; for b(t) = 1 - t/2 the creep
// frequency per tau-bin matches the mean creep probability of the bin.
Outcome creeping()
{
    const StableParams p(0.5, 1.0);
    const int n = 100000;
    RngStream r1(107, 0), r2(107, 1);
    const Boundary flat = Boundary::constant(1.0);
    int crept = 0;
    for (int i = 0; i < n; ++i) crept += sfp_sample(p, flat, kInf, r1).crept;
    const Boundary lin = Boundary::linear(1.0, 0.5);
    const int bins = 10;
    std::vector<double> count(bins), hits(bins), psum(bins), pvar(bins);
    for (int i = 0; i < n; ++i) {
        const PassageTriplet x = sfp_sample(p, lin, kInf, r2);
        const int k = std::min(bins - 1, static_cast<int>(x.tau / lin.T_b() * bins));
        const double pc = creep_probability(lin, x.tau, p.alpha);
        count[k] += 1;
        hits[k] += x.crept;
        psum[k] += pc;
        pvar[k] += pc * (1.0 - pc);
    }
    bool ok = crept == 0;
    double worst = 0.0;
    for (int k = 0; k < bins; ++k) {
        if (count[k] == 0) continue;
        const double sd = std::sqrt(pvar[k]);
        const double z = sd > 0.0 ? std::fabs(hits[k] - psum[k]) / sd : std::fabs(hits[k] - psum[k]);
        worst = std::max(worst, z);
    }
    ok = ok && worst <= 3.0;
    return {ok, fmt("constant: %d creeps; linear: worst bin |z|=%.2f", crept, worst)};
}

// 8. Work-counter trends.
Outcome complexity()
{
    std::string d;
    std::vector<double> small;
    for (double a : {0.1, 0.01, 0.001}) {
        const auto r = bench_point(BenchTarget::Sfp, a, 1000, 108, static_cast<std::uint64_t>(-std::log10(a)));
        small.push_back(r.ratio_log_alpha());
        d += fmt("sfp a=%g ratio=%.2f; ", a, r.ratio_log_alpha());
    }
    // Bounded as alpha -> 0: the ratio does not grow beyond half again its value at 0.1.
    const bool small_ok = std::max(small[1], small[2]) <= 1.5 * small[0];
    bool large_ok = true;
    for (double a : {0.9, 0.99, 0.999}) {
        const auto r = bench_point(BenchTarget::Sfp, a, 1000, 108, 10 + static_cast<std::uint64_t>(-std::log10(1.0 - a)));
        large_ok = large_ok && r.ratio_log_one_minus_alpha() <= 3.0;
        d += fmt("sfp a=%g ratio=%.2f; ", a, r.ratio_log_one_minus_alpha());
    }
    // Trend of the tempered sampler for the report, then the asserted point q = e^8.
    for (int k : {0, 2, 4, 6}) {
        const auto r = bench_point(BenchTarget::Tsffp, std::exp(double(k)), 100, 108, 20 + k);
        d += fmt("tsffp q=e^%d ratio=%.2f; ", k, r.ratio_log_q());
    }
    const auto top = bench_point(BenchTarget::Tsffp, std::exp(8.0), 50, 108, 28);
    const bool q_ok = top.ratio_log_q() <= 1.2;
    d += fmt("tsffp q=e^8 ratio=%.2f (<=1.2 %s)", top.ratio_log_q(), q_ok ? "met" : "not met");
    return {small_ok && large_ok && q_ok, d};
}

// 9. Bias of the skeleton-observed estimator against the mesh, on coupled paths.
Outcome bias_slope()
{
    FpdeSpec spec{TemperedParams(0.4, 1.0, 1.0), {1.0}, {1.0}, 10000};
    RngStream rng(109, 0);
    const auto d = fpde_draw(spec, rng);
    const double exact = fpde_from_times(spec, d.times, d.normals).front().value.estimate;
    const std::vector<double> hs = {0.2, 0.1, 0.05, 0.025};
    std::vector<double> lx, ly;
    std::string det;
    for (double h : hs) {
        const double biased = fpde_from_times(spec, skeleton_times(d, h), d.normals).front().value.estimate;
        const double gap = std::fabs(biased - exact);
        lx.push_back(std::log(h));
        ly.push_back(std::log(gap));
        det += fmt("h=%g bias=%.5f; ", h, gap);
    }
    const double mx = (lx[0] + lx[1] + lx[2] + lx[3]) / 4.0, my = (ly[0] + ly[1] + ly[2] + ly[3]) / 4.0;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < 4; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    return {std::fabs(slope - 1.0) <= 0.3, det + fmt("slope=%.3f", slope)};
}

// 10. Exponential moment of the stable passage time.
Outcome fpde_inequality()
{
    const double a = 0.5;
    FpdeSpec spec{TemperedParams(a, 1.0, 0.0), {1.0}, {1.0}, 100000};
    RngStream rng(110, 0);
    const auto d = fpde_draw(spec, rng);
    RunningMean m;
    for (const auto& row : d.times) m.add(std::exp(row[0]));
    const auto e = m.result();
    const double lower = std::exp(1.0) - 1.0 + 1.0 / std::tgamma(1.0 + a);
    return {e.estimate >= lower - 3.0 * e.se, fmt("mean e^T=%.5f+-%.5f, bound %.5f", e.estimate, e.se, lower)};
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"mean checks", mean_checks},
        {"tempered Laplace transform", tempered_laplace},
        {"proposal KS vs direct inversion", proposal_ks},
        {"tsfp vs tsffp KS", sampler_consistency},
        {"deterministic inequality suite", invariants},
        {"undershoot outer iterations", outer_iterations},
        {"creeping", creeping},
        {"complexity trends", complexity},
        {"baseline bias slope", bias_slope},
        {"FPDE inequality", fpde_inequality},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %zu (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed ? 1 : 0;
}
