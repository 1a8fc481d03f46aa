#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace subpass {

// Raised when a numerical routine cannot certify its result (quadrature not
// converged, root finder outside its basin, ...). Never swallowed internally.
class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw std::domain_error(what);
}

// Stable subordinator: Laplace exponent theta * u^alpha.
struct StableParams {
    double alpha;
    double theta = 1.0;

    StableParams(double a, double th = 1.0) : alpha(a), theta(th)
    {
        require(a > 0.0 && a < 1.0, "alpha in (0,1) required");
        require(th > 0.0 && std::isfinite(th), "theta > 0 required");
    }

    double r() const { return alpha / (1.0 - alpha); }
    double w_alpha() const { return std::tgamma(1.0 - alpha) / alpha; }
};

// Tempered stable subordinator: Levy measure of the stable one times e^{-qx}.
struct TemperedParams {
    StableParams base;
    double q = 0.0;

    TemperedParams(StableParams b, double qq = 0.0) : base(b), q(qq)
    {
        require(qq >= 0.0 && std::isfinite(qq), "q >= 0 required");
    }
    TemperedParams(double a, double th, double qq) : TemperedParams(StableParams(a, th), qq) {}

    double alpha() const { return base.alpha; }
    double theta() const { return base.theta; }
};

// Number of output bits requested from root finders and inversions.
struct Precision {
    int bits = 53;

    Precision() = default;
    explicit Precision(int n) : bits(n) { require(n >= 1, "precision bits N >= 1 required"); }

    double tolerance() const { return std::ldexp(1.0, -bits); }
};

}  // namespace subpass
