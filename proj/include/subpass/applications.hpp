#pragma once

// Monte Carlo estimators built on the first-passage samplers: an up-and-out
// barrier call under Z = Z+ - Z-, and the solution of a time-fractional
// equation driven by a tempered stable subordinator with geometric Brownian
// motion in space.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "boundary.hpp"
#include "bv_levy.hpp"
#include "first_passage.hpp"
#include "marginals.hpp"
#include "params.hpp"
#include "rng.hpp"
#include "variates.hpp"

namespace subpass {

struct EstimateWithError {
    double estimate = 0.0;
    double se = 0.0;   // sample standard deviation / sqrt(n)
    std::uint64_t n = 0;
};

// Welford accumulator; adds in call order, so results are reproducible.
class RunningMean {
public:
    void add(double x)
    {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    EstimateWithError result() const
    {
        EstimateWithError e;
        e.estimate = mean_;
        e.n = n_;
        e.se = n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1) / static_cast<double>(n_)) : 0.0;
        return e;
    }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline EstimateWithError mean_with_error(const std::vector<double>& xs)
{
    RunningMean m;
    for (double x : xs) m.add(x);
    return m.result();
}

// ---------------------------------------------------------------- barrier call

struct BarrierOptionSpec {
    BVProcessSpec process;
    double R0;
    double K;
    double M;
    double T;
    double delta = 0.0;

    void validate() const
    {
        require(R0 > 0.0, "barrier option requires R0 > 0");
        require(K > 0.0 && K < M, "barrier option requires 0 < K < M");
        require(T > 0.0 && std::isfinite(T), "barrier option requires a finite maturity T > 0");
    }
};

struct BarrierPrice {
    double R0;
    EstimateWithError price;
};

namespace detail {

inline std::vector<std::size_t> barrier_level_order(const std::vector<double>& r0_grid)
{
    std::vector<std::size_t> order(r0_grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Decreasing R0 means increasing level.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r0_grid[a] > r0_grid[b]; });
    return order;
}

}  // namespace detail

// Discounted payoffs of paths [first, last): out[i][k - first] for R0 = r0_grid[i].
// Path k draws from rng.split(k), so any partition of the paths gives the same
// values. One path of Z serves all grid points: levels log(M / R0) are visited in
// increasing order and the path is continued from its last crossing, which
// correlates neighbouring estimates. R0 >= M is knocked out at inception.
inline std::vector<std::vector<double>> barrier_payoffs(const BarrierOptionSpec& spec,
                                                        const std::vector<double>& r0_grid, std::uint64_t first,
                                                        std::uint64_t last, RngStream& rng,
                                                        const Precision& prec = {})
{
    spec.validate();
    require(first <= last, "barrier_payoffs requires first <= last");
    for (double r0 : r0_grid) require(r0 > 0.0, "barrier option requires R0 > 0");
    const auto order = detail::barrier_level_order(r0_grid);
    std::vector<std::vector<double>> out(r0_grid.size(), std::vector<double>(last - first, 0.0));
    const double discount = std::exp(-spec.delta * spec.T);
    for (std::uint64_t k = first; k < last; ++k) {
        RngStream path = rng.split(k);
        double t = 0.0, z = 0.0;
        bool crossed = false, at_horizon = false;
        for (std::size_t idx : order) {
            const double r0 = r0_grid[idx];
            if (r0 >= spec.M) continue;
            const double c = std::log(spec.M / r0);
            if (crossed && z >= c) continue;
            if (!at_horizon) {
                const BVPassageResult res = bvfp_continue(spec.process, c, spec.T, t, z, path, prec);
                t = res.time;
                z = res.value;
                at_horizon = res.stopped_by_horizon;
                crossed = !at_horizon;
            }
            if (at_horizon) out[idx][k - first] = discount * std::max(r0 * std::exp(z) - spec.K, 0.0);
        }
        rng.work += path.work;
    }
    return out;
}

// Prices of exp(-delta T) E[max(R0 e^{Z_T} - K, 0) 1{sup Z < log(M / R0)}] for every
// R0 in r0_grid (spec.R0 when empty), from paths 0..n-1.
inline std::vector<BarrierPrice> price_barrier(const BarrierOptionSpec& spec, std::uint64_t n, RngStream& rng,
                                               std::vector<double> r0_grid = {}, const Precision& prec = {})
{
    require(n >= 1, "price_barrier requires n >= 1");
    if (r0_grid.empty()) r0_grid.push_back(spec.R0);
    const auto pay = barrier_payoffs(spec, r0_grid, 0, n, rng, prec);
    std::vector<BarrierPrice> out;
    for (std::size_t i = 0; i < r0_grid.size(); ++i) out.push_back({r0_grid[i], mean_with_error(pay[i])});
    return out;
}

// ---------------------------------------------------------------- FPDE

struct FpdeSpec {
    TemperedParams tparams;
    std::vector<double> t_grid;   // strictly increasing, >= 0
    std::vector<double> x_grid;   // strictly increasing, > 0
    std::uint64_t n = 10000;
    std::function<double(double)> payoff = [](double x) { return x * x; };

    void validate() const
    {
        require(!t_grid.empty() && !x_grid.empty(), "FPDE grids must be nonempty");
        require(n >= 1, "FPDE requires n >= 1");
        require(t_grid.front() >= 0.0, "FPDE t grid must be nonnegative");
        require(x_grid.front() > 0.0, "FPDE x grid must be positive");
        for (std::size_t i = 1; i < t_grid.size(); ++i) require(t_grid[i] > t_grid[i - 1], "FPDE t grid must increase");
        for (std::size_t i = 1; i < x_grid.size(); ++i) require(x_grid[i] > x_grid[i - 1], "FPDE x grid must increase");
        require(static_cast<bool>(payoff), "FPDE payoff must be callable");
    }
};

// Per path: passage times T_t over the levels of t_grid and the Gaussian driver.
struct FpdeDraws {
    std::vector<std::vector<double>> times;   // times[k][j] = T_{t_j} on path k
    std::vector<double> normals;
};

struct FpdeRow {
    double t;
    double x;
    EstimateWithError value;
};

// Passage times of subordinator paths [first, last) over the increasing levels of
// t_grid, continuing from each crossing. Path k draws from rng.split(k).
inline FpdeDraws fpde_draw_range(const FpdeSpec& spec, std::uint64_t first, std::uint64_t last, RngStream& rng,
                                 const Precision& prec = {})
{
    spec.validate();
    require(first <= last, "fpde_draw_range requires first <= last");
    FpdeDraws d;
    d.times.resize(last - first);
    d.normals.resize(last - first);
    for (std::uint64_t k = first; k < last; ++k) {
        RngStream path = rng.split(k);
        d.normals[k - first] = sample_normal(path);
        double tau = 0.0, level = 0.0;   // level = S at the last crossing
        auto& row = d.times[k - first];
        row.reserve(spec.t_grid.size());
        for (double t : spec.t_grid) {
            if (t > level) {
                const PassageTriplet x = tsffp_sample(spec.tparams, Boundary::constant(t - level), path, prec);
                tau += x.tau;
                level += x.post;
            }
            row.push_back(tau);
        }
        rng.work += path.work;
    }
    return d;
}

inline FpdeDraws fpde_draw(const FpdeSpec& spec, RngStream& rng, const Precision& prec = {})
{
    return fpde_draw_range(spec, 0, spec.n, rng, prec);
}

// Estimator (1/n) sum payoff(x exp(sqrt(T) N - T / 2)) on the grid, t-major.
inline std::vector<FpdeRow> fpde_from_times(const FpdeSpec& spec, const std::vector<std::vector<double>>& times,
                                            const std::vector<double>& normals)
{
    require(times.size() == normals.size() && !times.empty(), "FPDE draws are inconsistent");
    std::vector<FpdeRow> out;
    for (std::size_t j = 0; j < spec.t_grid.size(); ++j) {
        for (double x : spec.x_grid) {
            RunningMean m;
            for (std::size_t k = 0; k < times.size(); ++k) {
                const double T = times[k][j];
                m.add(spec.payoff(x * std::exp(std::sqrt(T) * normals[k] - 0.5 * T)));
            }
            out.push_back({spec.t_grid[j], x, m.result()});
        }
    }
    return out;
}

inline std::vector<FpdeRow> fpde_estimate(const FpdeSpec& spec, RngStream& rng, const Precision& prec = {})
{
    const FpdeDraws d = fpde_draw(spec, rng, prec);
    return fpde_from_times(spec, d.times, d.normals);
}

// First grid time of mesh h at which a path crossing at tau is seen above the
// level. A nondecreasing path is above the level at every grid time from tau
// on and at or below it before, so this is h * ceil(tau / h).
inline double skeleton_time(double tau, double h)
{
    require(h > 0.0, "skeleton mesh h > 0 required");
    return h * std::ceil(tau / h);
}

// The times of draws seen through the skeleton of mesh h (same paths and normals).
inline std::vector<std::vector<double>> skeleton_times(const FpdeDraws& d, double h)
{
    auto out = d.times;
    for (auto& row : out)
        for (double& t : row) t = skeleton_time(t, h);
    return out;
}

// Biased baseline: the subordinator is simulated as a random walk with
// increments S_h, and T_t is replaced by the first grid time the walk exceeds t.
inline std::vector<FpdeRow> fpde_biased_baseline(const FpdeSpec& spec, double h, RngStream& rng,
                                                 std::uint64_t* walk_steps = nullptr)
{
    spec.validate();
    require(h > 0.0, "skeleton mesh h > 0 required");
    std::vector<std::vector<double>> times(spec.n);
    std::vector<double> normals(spec.n);
    std::uint64_t steps = 0;
    for (std::uint64_t k = 0; k < spec.n; ++k) {
        RngStream path = rng.split(k);
        normals[k] = sample_normal(path);
        double s = 0.0;
        std::uint64_t i = 0;
        for (double t : spec.t_grid) {
            while (!(s > t)) {
                s += sample_tempered_stable(spec.tparams, h, path);
                ++i;
            }
            times[k].push_back(static_cast<double>(i) * h);
        }
        steps += i;
        rng.work += path.work;
    }
    if (walk_steps) *walk_steps = steps;
    return fpde_from_times(spec, times, normals);
}

}  // namespace subpass
