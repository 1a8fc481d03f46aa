#pragma once

// Complexity sweeps on work counters. Wall time is recorded for reports only.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "boundary.hpp"
#include "first_passage.hpp"
#include "params.hpp"
#include "rng.hpp"

namespace subpass {

enum class BenchTarget { Sfp, Tsffp };

struct BenchRow {
    double param = 0.0;           // alpha for Sfp, q for Tsffp
    double mean_work = 0.0;       // mean of WorkCounters::total() per sample
    WorkCounters totals;          // summed over the n samples
    std::uint64_t n = 0;
    double seconds_per_1e4 = 0.0;

    // mean work / |log alpha|
    double ratio_log_alpha() const { return mean_work / std::fabs(std::log(param)); }
    // log(mean work) / |log(1 - alpha)|
    double ratio_log_one_minus_alpha() const { return std::log(mean_work) / std::fabs(std::log1p(-param)); }
    // log(mean work) / log(e + q)
    double ratio_log_q() const { return std::log(mean_work) / std::log(std::exp(1.0) + param); }
};

struct BenchConfig {
    double theta = 1.0;
    double level = 1.0;           // constant barrier
    double tsffp_alpha = 0.55;
    Precision prec{};
};

// One grid point: n samples on stream (seed, point index).
inline BenchRow bench_point(BenchTarget target, double param, std::uint64_t n, std::uint64_t seed,
                            std::uint64_t stream_id, const BenchConfig& cfg = {})
{
    require(n >= 1, "bench requires n >= 1");
    RngStream rng(seed, stream_id);
    const Boundary b = Boundary::constant(cfg.level);
    const auto t0 = std::chrono::steady_clock::now();
    if (target == BenchTarget::Sfp) {
        const StableParams p(param, cfg.theta);
        for (std::uint64_t i = 0; i < n; ++i) sfp_sample(p, b, std::numeric_limits<double>::infinity(), rng, cfg.prec);
    } else {
        const TemperedParams tp(cfg.tsffp_alpha, cfg.theta, param);
        for (std::uint64_t i = 0; i < n; ++i) tsffp_sample(tp, b, rng, cfg.prec);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    BenchRow row;
    row.param = param;
    row.n = n;
    row.totals = rng.work;
    row.mean_work = rng.work.total() / static_cast<double>(n);
    row.seconds_per_1e4 = secs / static_cast<double>(n) * 1e4;
    return row;
}

inline std::vector<BenchRow> bench_sweep(BenchTarget target, const std::vector<double>& grid, std::uint64_t n,
                                         std::uint64_t seed, const BenchConfig& cfg = {})
{
    require(n >= 100, "bench_sweep requires n >= 100");
    std::vector<BenchRow> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) rows.push_back(bench_point(target, grid[i], n, seed, i, cfg));
    return rows;
}

inline std::vector<std::string> bench_columns(BenchTarget target, bool with_walltime)
{
    std::vector<std::string> cols = {target == BenchTarget::Sfp ? "alpha" : "q", "n", "mean_work", "uniforms",
                                     "rejections", "newton", "bisections", "quad_calls", "lc_steps"};
    if (with_walltime) cols.push_back("walltime_s_per_1e4");
    cols.push_back("ratio");
    return cols;
}

// Values in the order of bench_columns. ratio is mean work / |log alpha| for
// alpha < 1/2, log(mean work) / |log(1 - alpha)| above, and log(mean work) / log(e + q).
inline std::vector<double> bench_values(BenchTarget target, const BenchRow& r, bool with_walltime)
{
    const double dn = static_cast<double>(r.n);
    std::vector<double> v = {r.param,
                             dn,
                             r.mean_work,
                             r.totals.uniforms / dn,
                             r.totals.rejections / dn,
                             r.totals.newton / dn,
                             r.totals.bisections / dn,
                             r.totals.quad_calls / dn,
                             r.totals.lc_steps / dn};
    if (with_walltime) v.push_back(r.seconds_per_1e4);
    if (target == BenchTarget::Tsffp)
        v.push_back(r.ratio_log_q());
    else
        v.push_back(r.param < 0.5 ? r.ratio_log_alpha() : r.ratio_log_one_minus_alpha());
    return v;
}

inline void write_bench_csv(std::ostream& os, BenchTarget target, const std::vector<BenchRow>& rows,
                            bool with_walltime = true)
{
    const auto cols = bench_columns(target, with_walltime);
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    os.precision(10);
    for (const auto& r : rows) {
        const auto v = bench_values(target, r, with_walltime);
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
        os << '\n';
    }
}

}  // namespace subpass
