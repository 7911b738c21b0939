#pragma once

#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace netgrowth {

/// Closed-form scalar function families used for arrivals, interaction
/// rates, benefits, costs and preference densities.
enum class Family {
    constant,           // v
    affine_saturating,  // f_inf + (f_sup - f_inf) * x / (x + k)
    logistic,           // lo + (hi - lo) / (1 + exp(-slope * (x - mid)))
    power,              // coef * |x|^p, odd-extended derivative for x < 0
    power_benefit,      // scale * x^a, 0 < a <= 1
    quadratic,          // c_lin * x + c * x^2
    s_shaped_benefit,   // height / (1 + exp(-steepness * (x - t_threshold)))
    ramp,               // max(0, v0 - slope * x)
};

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);

/// Parameter names accepted by `FunctionSpec::make` for a family.
std::vector<std::string> parameter_names(Family f);

/// An immutable function specification with analytic first and second
/// derivatives. Construct through the named factories or `make`.
class FunctionSpec {
public:
    using Params = std::map<std::string, double>;

    static FunctionSpec constant(double value);
    static FunctionSpec affine_saturating(double f_inf, double f_sup, double k);
    static FunctionSpec logistic(double lo, double hi, double slope, double mid);
    static FunctionSpec power(double coef, double exponent);
    static FunctionSpec power_benefit(double a, double scale = 1.0);
    static FunctionSpec quadratic(double c, double c_lin = 0.0);
    static FunctionSpec s_shaped_benefit(double t_threshold, double height, double steepness);
    static FunctionSpec ramp(double v0, double slope);

    /// Builds from a family name plus named parameters; missing optional
    /// parameters take their defaults, unknown names throw.
    static FunctionSpec make(Family family, const Params& params);

    Family family() const noexcept { return family_; }
    const Params& params() const noexcept { return params_; }
    double param(const std::string& name) const;

    double domain_lo() const noexcept { return domain_lo_; }
    double domain_hi() const noexcept { return domain_hi_; }

    double value(double x) const;
    double d1(double x) const;
    double d2(double x) const;
    double operator()(double x) const { return value(x); }

    /// Infimum and supremum over [0, inf); +inf when unbounded.
    std::pair<double, double> range() const;

    /// Points in (0, inf) where the function is not twice differentiable.
    std::vector<double> kinks() const;

private:
    FunctionSpec(Family family, Params params);

    Family family_;
    Params params_;
    double p0_ = 0, p1_ = 0, p2_ = 0, p3_ = 0;
    double domain_lo_ = 0.0;
    double domain_hi_ = std::numeric_limits<double>::infinity();
};

}  // namespace netgrowth
