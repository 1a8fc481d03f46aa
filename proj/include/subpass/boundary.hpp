#pragma once

// Nonincreasing barriers b on [0, inf) with lazy time/level shifts and an
// optional cap, plus B(t) = t^(-1/alpha) b(t) and its inverse.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "params.hpp"
#include "rng.hpp"

namespace subpass {

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Unshifted barrier function. deriv returns -1 where b is not differentiable.
struct BarrierBase {
    virtual ~BarrierBase() = default;
    virtual double value(double t) const = 0;
    virtual double deriv(double t) const = 0;
    // inf{t >= 0 : b(t) <= v} for 0 <= v < b(0); inf when never reached.
    virtual double level_time(double v) const = 0;
    virtual bool constant() const { return false; }
};

struct ConstantBarrier final : BarrierBase {
    double c;
    explicit ConstantBarrier(double cc) : c(cc) {}
    double value(double) const override { return c; }
    double deriv(double) const override { return 0.0; }
    double level_time(double v) const override { return v < c ? kInf : 0.0; }
    bool constant() const override { return true; }
};

// a0 - a1 t, truncated at 0.
struct LinearBarrier final : BarrierBase {
    double a0, a1;
    LinearBarrier(double a, double b) : a0(a), a1(b) {}
    double value(double t) const override { return std::max(a0 - a1 * t, 0.0); }
    double deriv(double t) const override
    {
        const double tb = a0 / a1;
        if (t < tb) return -a1;
        return t == tb ? -1.0 : 0.0;
    }
    double level_time(double v) const override { return (a0 - v) / a1; }
};

struct PiecewiseLinearBarrier final : BarrierBase {
    std::vector<double> t, b;   // knots; held constant after the last one

    PiecewiseLinearBarrier(std::vector<double> tt, std::vector<double> bb) : t(std::move(tt)), b(std::move(bb))
    {
        require(t.size() == b.size() && !t.empty(), "piecewise barrier needs matching nonempty knot lists");
        require(t.front() == 0.0, "piecewise barrier must start at t = 0");
        require(b.front() > 0.0, "piecewise barrier requires b(0) > 0");
        for (std::size_t i = 1; i < t.size(); ++i) {
            require(t[i] > t[i - 1], "piecewise barrier knots must have strictly increasing t");
            require(b[i] <= b[i - 1], "piecewise barrier must be nonincreasing");
            require(b[i] >= 0.0, "piecewise barrier must be nonnegative");
        }
    }
    std::size_t segment(double x) const
    {
        return static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin()) - 1;
    }
    double value(double x) const override
    {
        if (x >= t.back()) return b.back();
        const std::size_t i = segment(x);
        const double w = (x - t[i]) / (t[i + 1] - t[i]);
        return b[i] + w * (b[i + 1] - b[i]);
    }
    double slope(std::size_t i) const
    {
        return i + 1 < t.size() ? (b[i + 1] - b[i]) / (t[i + 1] - t[i]) : 0.0;
    }
    double deriv(double x) const override
    {
        const std::size_t i = segment(x);
        if (x == t[i] && i > 0 && slope(i - 1) != slope(i)) return -1.0;
        return slope(i);
    }
    double level_time(double v) const override
    {
        if (v >= b.front()) return 0.0;
        for (std::size_t i = 0; i + 1 < t.size(); ++i) {
            if (b[i + 1] <= v) return t[i] + (b[i] - v) / (b[i] - b[i + 1]) * (t[i + 1] - t[i]);
        }
        return kInf;
    }
};

struct CallbackBarrier final : BarrierBase {
    std::function<double(double)> f, fp;
    double tb;
    CallbackBarrier(std::function<double(double)> ff, std::function<double(double)> ffp, double t_b)
        : f(std::move(ff)), fp(std::move(ffp)), tb(t_b)
    {
    }
    double value(double x) const override { return x >= tb ? 0.0 : f(x); }
    double deriv(double x) const override { return x >= tb ? 0.0 : fp(x); }
    double level_time(double v) const override
    {
        if (v <= 0.0) return tb;
        if (f(0.0) <= v) return 0.0;
        double lo = 0.0, hi = std::isfinite(tb) ? tb : 1.0;
        if (!std::isfinite(tb)) {
            while (f(hi) > v) {
                lo = hi;
                hi *= 2.0;
                if (hi > 1e300) return kInf;
            }
        }
        for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (f(mid) > v ? lo : hi) = mid;
        }
        return hi;
    }
};

}  // namespace detail

// Analytic inverse of B for a caller-supplied callback barrier: (v, alpha) -> t.
using InverseB = std::function<double(double, double)>;

class Boundary {
public:
    static Boundary constant(double c)
    {
        require(c > 0.0 && std::isfinite(c), "constant barrier requires c > 0");
        return Boundary(std::make_shared<detail::ConstantBarrier>(c));
    }

    // a0 - a1 t truncated at 0; a1 = 0 gives a constant.
    static Boundary linear(double a0, double a1)
    {
        require(a0 > 0.0 && std::isfinite(a0), "linear barrier requires a0 > 0");
        require(a1 >= 0.0 && std::isfinite(a1), "linear barrier requires a1 >= 0 (nonincreasing)");
        if (a1 == 0.0) return constant(a0);
        return Boundary(std::make_shared<detail::LinearBarrier>(a0, a1));
    }

    static Boundary piecewise_linear(std::vector<double> t, std::vector<double> b)
    {
        return Boundary(std::make_shared<detail::PiecewiseLinearBarrier>(std::move(t), std::move(b)));
    }

    // Text file with header "t,b" and one "t,b" pair per line.
    static Boundary from_file(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open barrier file: " + path);
        std::string line;
        if (!std::getline(in, line)) throw std::runtime_error("barrier file is empty: " + path);
        line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
        if (line != "t,b") throw std::runtime_error("barrier file must start with header \"t,b\"");
        std::vector<double> ts, bs;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream row(line);
            double t, b;
            if (!(row >> t >> b)) throw std::runtime_error("malformed barrier row: " + line);
            ts.push_back(t);
            bs.push_back(b);
        }
        return piecewise_linear(std::move(ts), std::move(bs));
    }

    static Boundary callback(std::function<double(double)> b, std::function<double(double)> b_prime,
                             double t_b = detail::kInf, InverseB inverse_b = {})
    {
        require(static_cast<bool>(b) && static_cast<bool>(b_prime), "callback barrier needs b and b'");
        require(t_b > 0.0, "callback barrier requires T_b > 0");
        Boundary out(std::make_shared<detail::CallbackBarrier>(std::move(b), std::move(b_prime), t_b));
        require(out.b0() > 0.0, "callback barrier requires b(0) > 0");
        out.inverse_b_ = std::move(inverse_b);
        return out;
    }

    double b(double t) const
    {
        require(t >= 0.0, "barrier evaluated at negative time");
        const double v = base_->value(t + dt_) - dv_;
        return std::max(std::min(v, cap_), 0.0);
    }

    // Derivative; -1 where b is not differentiable, 0 on the capped part.
    double b_prime(double t) const
    {
        const double v = base_->value(t + dt_) - dv_;
        if (v <= 0.0) return 0.0;
        if (v > cap_) return 0.0;
        const double d = base_->deriv(t + dt_);
        if (v == cap_ && d != 0.0) return -1.0;
        return d;
    }

    double b0() const { return b(0.0); }

    // First zero of b; inf when b stays positive.
    double T_b() const
    {
        const double lt = base_->level_time(dv_);
        return std::isfinite(lt) ? std::max(lt - dt_, 0.0) : lt;
    }

    bool is_constant() const { return base_->constant(); }
    bool is_shifted() const { return dt_ != 0.0 || dv_ != 0.0; }
    double cap() const { return cap_; }

    // t -> b(t + dt) - dv.
    Boundary shifted(double dt, double dv) const
    {
        require(dt >= 0.0 && dv >= 0.0, "barrier shift requires dt >= 0 and dv >= 0");
        Boundary out = *this;
        out.dt_ += dt;
        out.dv_ += dv;
        out.cap_ = cap_ - dv;
        require(out.b0() > 0.0, "shifted barrier has b(0) <= 0: the crossing already occurred");
        return out;
    }

    // t -> min(b(t), R).
    Boundary capped(double R) const
    {
        require(R > 0.0, "barrier cap requires R > 0");
        Boundary out = *this;
        out.cap_ = std::min(cap_, R);
        return out;
    }

    // B(t) = t^(-1/alpha) b(t); B(inf) = 0.
    double B(double t, double alpha) const
    {
        if (std::isinf(t) || t >= T_b()) return 0.0;
        return std::exp(std::log(b(t)) - std::log(t) / alpha);
    }

    // log B(t); -inf at t = inf or t >= T_b.
    double log_B(double t, double alpha) const
    {
        if (std::isinf(t) || t >= T_b()) return -detail::kInf;
        return std::log(b(t)) - std::log(t) / alpha;
    }

    // t in (0, T_b) with B(t) = v.
    double inverse_B(double v, double alpha, const Precision& prec = {}, WorkCounters* wc = nullptr) const
    {
        require(v > 0.0, "inverse_B requires v > 0");
        return inverse_log_B(std::log(v), alpha, prec, wc);
    }

    // t in (0, T_b) with log B(t) = lv.
    double inverse_log_B(double lv, double alpha, const Precision& prec = {}, WorkCounters* wc = nullptr) const
    {
        require(std::isfinite(lv), "inverse_B requires v > 0");
        if (is_constant()) return std::exp(alpha * (std::log(b0()) - lv));
        if (inverse_b_ && !is_shifted() && std::isinf(cap_)) return inverse_b_(std::exp(lv), alpha);
        const double tb = T_b();
        // h(x) = log B(e^x) - log v is strictly decreasing in x = log t.
        auto h = [&](double x) {
            const double t = std::exp(x);
            if (t >= tb) return -detail::kInf;
            const double bt = b(t);
            if (!(bt > 0.0)) return -detail::kInf;
            return std::log(bt) - x / alpha - lv;
        };
        double lo = 0.0, hi = 0.0;
        if (std::isfinite(tb)) lo = hi = std::log(0.5 * tb);
        double step = 1.0;
        while (h(lo) <= 0.0) {
            hi = lo;
            lo -= step;
            step *= 2.0;
            if (wc) ++wc->bisections;
            if (lo < -1e4) throw NumericFailure("inverse_B: no lower bracket");
        }
        step = 1.0;
        if (hi == lo || h(hi) > 0.0) {
            hi = lo;
            for (;;) {
                double next;
                if (std::isfinite(tb)) {
                    // approach T_b geometrically from below
                    const double t = std::exp(hi);
                    next = std::log(t + 0.5 * (tb - t));
                    if (!(next > hi)) throw NumericFailure("inverse_B: bracket collapsed at T_b");
                } else {
                    next = hi + step;
                    step *= 2.0;
                }
                if (wc) ++wc->bisections;
                if (h(next) <= 0.0) {
                    hi = next;
                    break;
                }
                lo = next;
                hi = next;
                if (hi > 1e4) throw NumericFailure("inverse_B: no upper bracket");
            }
        }
        const double tol = std::max(prec.tolerance(), 4.0 * std::numeric_limits<double>::epsilon());
        std::uintmax_t iters = 200;
        auto neg_h = [&](double x) {
            const double y = h(x);
            return std::isinf(y) ? -std::numeric_limits<double>::max() : y;
        };
        const auto br = boost::math::tools::toms748_solve(
            neg_h, lo, hi, [tol](double a, double b) { return std::fabs(b - a) <= tol * std::max(1.0, std::fabs(a)); },
            iters);
        if (wc) wc->bisections += iters;
        const double t = std::exp(0.5 * (br.first + br.second));
        return std::min(t, std::nextafter(tb, 0.0));
    }

private:
    explicit Boundary(std::shared_ptr<const detail::BarrierBase> base) : base_(std::move(base)) {}

    std::shared_ptr<const detail::BarrierBase> base_;
    InverseB inverse_b_;
    double dt_ = 0.0;
    double dv_ = 0.0;
    double cap_ = detail::kInf;
};

inline Boundary boundary_shift(const Boundary& b, double dt, double dv) { return b.shifted(dt, dv); }
inline Boundary boundary_cap(const Boundary& b, double R) { return b.capped(R); }

// Probability that the crossing at time t is by creeping:
// -b'(t) / (-b'(t) + b(t) / (alpha t)).
inline double creep_probability(const Boundary& b, double t, double alpha)
{
    require(t > 0.0 && t < b.T_b(), "creep_probability requires 0 < t < T_b");
    const double d = -b.b_prime(t);
    if (d <= 0.0) return 0.0;
    return d / (d + b.b(t) / (alpha * t));
}

}  // namespace subpass
