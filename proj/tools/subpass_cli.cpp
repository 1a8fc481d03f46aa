// subpass: command-line front end for the first-passage samplers and their applications.
//
//   subpass sample   --kind fpt|stable|tempered ...
//   subpass price    up-and-out call under a difference of tempered stable subordinators
//   subpass fpde     Monte Carlo solution of the time-fractional equation
//   subpass bench    work-counter sweeps
//   subpass validate --suite invariants|ks
//
// Exit codes: 0 success, 1 a validation suite failed, 2 invalid configuration,
// 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <subpass/subpass.hpp>

namespace {

using namespace subpass;

using Cell = std::variant<double, std::int64_t, bool, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string cell_text(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    if (const auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
    return std::get<std::string>(c);
}

nlohmann::ordered_json cell_json(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d)) return format_double(*d);
        return *d;
    }
    if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
    if (const auto* b = std::get_if<bool>(&c)) return *b;
    return std::get<std::string>(c);
}

void write_table(std::ostream& os, const Table& t, const std::string& format)
{
    if (format == "json") {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) {
            nlohmann::ordered_json obj;
            for (std::size_t i = 0; i < t.columns.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
            arr.push_back(std::move(obj));
        }
        os << arr.dump(1) << '\n';
        return;
    }
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::string text = cell_text(row[i]);
            if (text.find_first_of(",\"") != std::string::npos) text = '"' + text + '"';
            os << (i ? "," : "") << text;
        }
        os << '\n';
    }
}

void emit(const Table& t, const std::string& out, const std::string& format)
{
    if (out.empty() || out == "-") {
        write_table(std::cout, t, format);
        return;
    }
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open output file: " + out);
    write_table(f, t, format);
}

// Runs fn(first, last, stream_copy) on k contiguous ranges of [0, n) and returns
// the results in range order. Each range gets its own copy of the root stream;
// per-item streams come from split(index), so the result does not depend on k.
template <class R>
std::vector<R> run_ranges(std::uint64_t n, unsigned k, const RngStream& root,
                          const std::function<R(std::uint64_t, std::uint64_t, RngStream&)>& fn)
{
    k = std::max(1u, static_cast<unsigned>(std::min<std::uint64_t>(k, std::max<std::uint64_t>(n, 1))));
    std::vector<R> out(k);
    std::vector<std::exception_ptr> errors(k);
    auto job = [&](unsigned i) {
        try {
            RngStream local = root;
            out[i] = fn(n * i / k, n * (i + 1) / k, local);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (k == 1) {
        job(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < k; ++i) pool.emplace_back(job, i);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

std::uint64_t default_seed()
{
    if (const char* env = std::getenv("SUBPASS_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && end != env) return v;
        throw std::domain_error("SUBPASS_SEED must be a nonnegative integer");
    }
    return 1;
}

// const:<b> | linear:<a0>,<a1> | file:<path>
Boundary parse_barrier(const std::string& desc)
{
    const auto colon = desc.find(':');
    if (colon == std::string::npos) throw std::domain_error("barrier must be const:<b>, linear:<a0>,<a1> or file:<path>");
    const std::string kind = desc.substr(0, colon), arg = desc.substr(colon + 1);
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw std::domain_error("barrier parameter is not a number: " + s);
        }
        if (used != s.size()) throw std::domain_error("barrier parameter is not a number: " + s);
        return v;
    };
    if (kind == "const") return Boundary::constant(number(arg));
    if (kind == "linear") {
        const auto comma = arg.find(',');
        if (comma == std::string::npos) throw std::domain_error("linear barrier needs linear:<a0>,<a1>");
        return Boundary::linear(number(arg.substr(0, comma)), number(arg.substr(comma + 1)));
    }
    if (kind == "file") return Boundary::from_file(arg);
    throw std::domain_error("unknown barrier kind: " + kind);
}

std::vector<double> arithmetic_grid(double first, double step, int count)
{
    std::vector<double> g;
    for (int i = 0; i < count; ++i) g.push_back(first + step * i);
    return g;
}

struct Common {
    std::uint64_t seed = 1;
    std::string out = "-";
    std::string format = "csv";
    int bits = 53;
    unsigned threads = 1;
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--seed", c.seed, "Root seed (default: $SUBPASS_SEED or 1)");
    sub->add_option("--out,-o", c.out, "Output path, - for stdout");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--precision", c.bits, "Output bits N of the inversions");
    sub->add_option("--threads", c.threads, "Worker threads; results do not depend on this");
}

// ---------------------------------------------------------------- sample

struct SampleConfig {
    std::string kind = "fpt";
    std::string sampler = "tsffp";
    double alpha = 0.5, theta = 1.0, q = 0.0, t = 1.0;
    std::string barrier = "const:1";
    std::uint64_t n = 1000;
};

int cmd_sample(const SampleConfig& cfg, const Common& com)
{
    const TemperedParams tp(cfg.alpha, cfg.theta, cfg.q);
    const Precision prec(com.bits);
    const RngStream root(com.seed, 0);
    Table t;
    if (cfg.kind == "fpt") {
        const Boundary b = parse_barrier(cfg.barrier);
        t.columns = {"tau", "undershoot", "value", "crept"};
        using Rows = std::vector<std::vector<Cell>>;
        const auto parts = run_ranges<Rows>(cfg.n, com.threads, root, [&](std::uint64_t lo, std::uint64_t hi, RngStream& rng) {
            Rows rows;
            for (std::uint64_t i = lo; i < hi; ++i) {
                RngStream s = rng.split(i);
                const PassageTriplet x =
                    cfg.sampler == "tsfp" ? tsfp_sample(tp, b, s, prec) : tsffp_sample(tp, b, s, prec);
                rows.push_back({x.tau, x.pre, x.post, x.crept});
            }
            return rows;
        });
        for (const auto& p : parts) t.rows.insert(t.rows.end(), p.begin(), p.end());
    } else {
        require(cfg.t > 0.0 && std::isfinite(cfg.t), "marginal time t > 0 required");
        t.columns = {"value"};
        using Vals = std::vector<double>;
        const auto parts = run_ranges<Vals>(cfg.n, com.threads, root, [&](std::uint64_t lo, std::uint64_t hi, RngStream& rng) {
            Vals v;
            for (std::uint64_t i = lo; i < hi; ++i) {
                RngStream s = rng.split(i);
                v.push_back(cfg.kind == "stable" ? sample_stable(tp.base, cfg.t, s) : sample_tempered_stable(tp, cfg.t, s));
            }
            return v;
        });
        for (const auto& p : parts)
            for (double v : p) t.rows.push_back({v});
    }
    emit(t, com.out, com.format);
    return 0;
}

// ---------------------------------------------------------------- price

struct PriceConfig {
    double alpha_plus = 0.66, theta_plus = 0.1305, q_plus = 6.5022;
    double alpha_minus = 0.66, theta_minus = 0.0615, q_minus = 3.3088;
    double K = 98.0, M = 102.0, delta = 0.0;
    std::vector<double> T = {14.0 / 365.0, 30.0 / 365.0, 90.0 / 365.0};
    std::vector<double> R0 = arithmetic_grid(98.0, 0.031, 130);
    std::uint64_t n = 10000;
};

int cmd_price(const PriceConfig& cfg, const Common& com)
{
    const BVProcessSpec process(TemperedParams(cfg.alpha_plus, cfg.theta_plus, cfg.q_plus),
                                TemperedParams(cfg.alpha_minus, cfg.theta_minus, cfg.q_minus));
    require(cfg.n >= 1, "n >= 1 required");
    require(!cfg.R0.empty() && !cfg.T.empty(), "R0 and T lists must be nonempty");
    const Precision prec(com.bits);
    Table t;
    t.columns = {"R0", "T", "price", "se", "n"};
    for (std::size_t ti = 0; ti < cfg.T.size(); ++ti) {
        BarrierOptionSpec spec{process, cfg.R0.front(), cfg.K, cfg.M, cfg.T[ti], cfg.delta};
        spec.validate();
        const RngStream root(com.seed, ti);
        using Pay = std::vector<std::vector<double>>;
        const auto parts = run_ranges<Pay>(cfg.n, com.threads, root, [&](std::uint64_t lo, std::uint64_t hi, RngStream& rng) {
            return barrier_payoffs(spec, cfg.R0, lo, hi, rng, prec);
        });
        for (std::size_t i = 0; i < cfg.R0.size(); ++i) {
            RunningMean m;
            for (const auto& p : parts)
                for (double v : p[i]) m.add(v);
            const auto e = m.result();
            t.rows.push_back({cfg.R0[i], cfg.T[ti], e.estimate, e.se, static_cast<std::int64_t>(e.n)});
        }
    }
    emit(t, com.out, com.format);
    return 0;
}

// ---------------------------------------------------------------- fpde

struct FpdeConfig {
    double alpha = 0.4, theta = 1.0, q = 1.0;
    std::vector<double> t_grid = arithmetic_grid(0.05, 0.05, 20);
    std::vector<double> x_grid = arithmetic_grid(0.01, 0.01, 100);
    std::uint64_t n = 10000;
    double baseline_h = 0.0;
};

int cmd_fpde(const FpdeConfig& cfg, const Common& com)
{
    FpdeSpec spec{TemperedParams(cfg.alpha, cfg.theta, cfg.q), cfg.t_grid, cfg.x_grid, cfg.n};
    spec.validate();
    require(cfg.baseline_h >= 0.0, "baseline mesh h > 0 required");
    const RngStream root(com.seed, 0);
    std::vector<FpdeRow> rows;
    if (cfg.baseline_h > 0.0) {
        RngStream rng = root;
        rows = fpde_biased_baseline(spec, cfg.baseline_h, rng);
    } else {
        const Precision prec(com.bits);
        const auto parts = run_ranges<FpdeDraws>(cfg.n, com.threads, root, [&](std::uint64_t lo, std::uint64_t hi, RngStream& rng) {
            return fpde_draw_range(spec, lo, hi, rng, prec);
        });
        FpdeDraws all;
        for (const auto& p : parts) {
            all.times.insert(all.times.end(), p.times.begin(), p.times.end());
            all.normals.insert(all.normals.end(), p.normals.begin(), p.normals.end());
        }
        rows = fpde_from_times(spec, all.times, all.normals);
    }
    Table t;
    t.columns = {"t", "x", "estimate", "se", "n"};
    for (const auto& r : rows)
        t.rows.push_back({r.t, r.x, r.value.estimate, r.value.se, static_cast<std::int64_t>(r.value.n)});
    emit(t, com.out, com.format);
    return 0;
}

// ---------------------------------------------------------------- bench

struct BenchCliConfig {
    std::string target = "sfp";
    std::vector<double> grid;
    std::uint64_t n = 100;
    std::string metric = "counters";
    double theta = 1.0, level = 1.0, alpha = 0.55;
};

int cmd_bench(const BenchCliConfig& cfg, const Common& com)
{
    const BenchTarget target = cfg.target == "sfp" ? BenchTarget::Sfp : BenchTarget::Tsffp;
    std::vector<double> grid = cfg.grid;
    if (grid.empty()) {
        if (target == BenchTarget::Sfp)
            grid = {0.001, 0.01, 0.1, 0.5, 0.9, 0.99, 0.999};
        else
            for (int k = 0; k <= 6; ++k) grid.push_back(std::exp(static_cast<double>(k)));
    }
    for (double g : grid) {
        if (target == BenchTarget::Sfp)
            require(g > 0.0 && g < 1.0, "alpha in (0,1) required");
        else
            require(g > 0.0 && std::isfinite(g), "q > 0 required");
    }
    BenchConfig bc;
    bc.theta = cfg.theta;
    bc.level = cfg.level;
    bc.tsffp_alpha = cfg.alpha;
    bc.prec = Precision(com.bits);
    const auto rows = bench_sweep(target, grid, cfg.n, com.seed, bc);
    const bool wall = cfg.metric == "walltime";
    Table t;
    t.columns = bench_columns(target, wall);
    for (const auto& r : rows) {
        std::vector<Cell> cells;
        const auto v = bench_values(target, r, wall);
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i == 1)
                cells.push_back(static_cast<std::int64_t>(r.n));
            else
                cells.push_back(v[i]);
        }
        t.rows.push_back(std::move(cells));
    }
    emit(t, com.out, com.format);
    return 0;
}

// ---------------------------------------------------------------- validate

struct ValidateConfig {
    std::string suite = "invariants";
    std::uint64_t n = 10000;
    std::vector<double> alphas = {0.1, 0.3, 0.5, 0.7, 0.9};
    double level = 0.001;
};

int cmd_validate(const ValidateConfig& cfg, const Common& com)
{
    Table t;
    bool ok = true;
    if (cfg.suite == "invariants") {
        const InvariantReport rep = invariant_grid_suite();
        t.columns = {"check", "worst", "bound", "points", "pass"};
        for (const auto& c : rep.checks)
            t.rows.push_back({c.name, c.worst, c.bound, static_cast<std::int64_t>(c.points), c.passed});
        ok = rep.all_passed();
    } else {
        for (double a : cfg.alphas) require(a > 0.0 && a < 1.0, "alpha in (0,1) required");
        require(cfg.level > 0.0 && cfg.level < 1.0, "KS level in (0,1) required");
        const auto rows = proposal_ks_suite(cfg.alphas, cfg.n, com.seed);
        t.columns = {"test", "n", "m", "D", "p", "pass"};
        for (const auto& r : rows) {
            const bool pass = r.result.passes(cfg.level);
            ok = ok && pass;
            t.rows.push_back({r.test, static_cast<std::int64_t>(r.result.n), static_cast<std::int64_t>(r.result.m),
                              r.result.statistic, r.result.p_value, pass});
        }
    }
    emit(t, com.out, com.format);
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact first-passage simulation for stable and tempered stable subordinators"};
    app.require_subcommand(1);

    Common com;
    try {
        com.seed = default_seed();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    SampleConfig sc;
    auto* sample = app.add_subcommand("sample", "Draw first-passage triplets or marginals");
    add_common(sample, com);
    sample->add_option("--kind", sc.kind, "fpt, stable or tempered")->check(CLI::IsMember({"fpt", "stable", "tempered"}));
    sample->add_option("--sampler", sc.sampler, "Tempered triplet sampler")->check(CLI::IsMember({"tsffp", "tsfp"}));
    sample->add_option("--alpha", sc.alpha, "Stability index in (0,1)");
    sample->add_option("--theta", sc.theta, "Scale theta > 0");
    sample->add_option("--q", sc.q, "Tempering rate q >= 0");
    sample->add_option("--t", sc.t, "Time of the marginal draws");
    sample->add_option("--barrier", sc.barrier, "const:<b> | linear:<a0>,<a1> | file:<path>");
    sample->add_option("--n", sc.n, "Number of draws");

    PriceConfig pc;
    auto* price = app.add_subcommand("price", "Up-and-out barrier call prices");
    add_common(price, com);
    price->add_option("--alpha-plus", pc.alpha_plus);
    price->add_option("--theta-plus", pc.theta_plus);
    price->add_option("--q-plus", pc.q_plus);
    price->add_option("--alpha-minus", pc.alpha_minus);
    price->add_option("--theta-minus", pc.theta_minus);
    price->add_option("--q-minus", pc.q_minus);
    price->add_option("--K", pc.K, "Strike");
    price->add_option("--M", pc.M, "Knock-out level");
    price->add_option("--delta", pc.delta, "Discount rate");
    price->add_option("--T", pc.T, "Maturities")->delimiter(',');
    price->add_option("--R0", pc.R0, "Initial values")->delimiter(',');
    price->add_option("--n", pc.n, "Paths per maturity");

    FpdeConfig fc;
    auto* fpde = app.add_subcommand("fpde", "Monte Carlo solution of the time-fractional equation");
    add_common(fpde, com);
    fpde->add_option("--alpha", fc.alpha);
    fpde->add_option("--theta", fc.theta);
    fpde->add_option("--q", fc.q);
    fpde->add_option("--t-grid", fc.t_grid, "Increasing times")->delimiter(',');
    fpde->add_option("--x-grid", fc.x_grid, "Increasing positive x")->delimiter(',');
    fpde->add_option("--n", fc.n, "Paths");
    fpde->add_option("--baseline-h", fc.baseline_h, "Use the random-walk baseline with mesh h");

    BenchCliConfig bcfg;
    auto* bench = app.add_subcommand("bench", "Work-counter sweeps");
    add_common(bench, com);
    bench->add_option("--target", bcfg.target)->check(CLI::IsMember({"sfp", "tsffp"}));
    bench->add_option("--grid", bcfg.grid, "alpha values (sfp) or q values (tsffp)")->delimiter(',');
    bench->add_option("--n", bcfg.n, "Samples per grid point (>= 100)");
    bench->add_option("--metric", bcfg.metric, "counters, or walltime to add the wall-clock column")
        ->check(CLI::IsMember({"counters", "walltime"}));
    bench->add_option("--theta", bcfg.theta);
    bench->add_option("--level", bcfg.level, "Constant barrier level");
    bench->add_option("--alpha", bcfg.alpha, "alpha of the tempered sweep");

    ValidateConfig vc;
    auto* validate = app.add_subcommand("validate", "Deterministic inequality suite or proposal KS tests");
    add_common(validate, com);
    validate->add_option("--suite", vc.suite)->check(CLI::IsMember({"invariants", "ks"}));
    validate->add_option("--n", vc.n, "Sample size per KS test");
    validate->add_option("--alphas", vc.alphas)->delimiter(',');
    validate->add_option("--level", vc.level, "KS significance level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (com.threads < 1) throw std::domain_error("--threads must be >= 1");
        if (*sample) return cmd_sample(sc, com);
        if (*price) return cmd_price(pc, com);
        if (*fpde) return cmd_fpde(fc, com);
        if (*bench) return cmd_bench(bcfg, com);
        if (*validate) return cmd_validate(vc, com);
    } catch (const NumericFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
