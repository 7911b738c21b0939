#pragma once

#include "netgrowth/function_spec.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace netgrowth {

/// Everything needed to assemble a model instance. Scalars are in model
/// time units; `eta_sup` defaults to `eta` when absent.
struct ModelConfig {
    FunctionSpec f = FunctionSpec::constant(1.0);
    FunctionSpec g = FunctionSpec::constant(1.0);
    FunctionSpec b = FunctionSpec::power_benefit(1.0);
    FunctionSpec c = FunctionSpec::quadratic(1.0);
    double eta_tilde = 0.5;
    double eta = 0.5;
    std::optional<double> eta_sup;
    double rho = 0.1;
    double lambda_sup = 10.0;
    double x_initial = 0.4;
    std::optional<double> c_enter;
};

/// A validated deterministic model instance. Immutable by convention: the
/// `with_*` helpers return modified copies for comparative statics.
struct ModelParams {
    FunctionSpec f, g, b, c;
    double eta_tilde;
    double eta;
    double eta_sup;
    double rho;
    double lambda_sup;
    double x_initial;
    double f_inf;
    double f_sup;
    double g_sup;
    std::optional<double> c_enter;

    /// Copy with a different interaction time. Values above eta_sup are
    /// allowed so central differences can straddle the upper end.
    ModelParams with_eta(double new_eta) const;
    ModelParams with_rho(double new_rho) const;

    /// c'(0): the smallest marginal cost on the admissible control set.
    double c_inf() const { return c.d1(0.0); }
};

/// A violated model constraint; `what()` names the constraint.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Throws ModelError naming the first violated constraint.
ModelParams build_model(const ModelConfig& config);

/// Inverse of the marginal cost c'(.) (analytic for the supported cost
/// families, defined on the whole real line through the odd extension).
double marginal_cost_inverse(const FunctionSpec& c, double y);

/// Slope of marginal_cost_inverse, i.e. 1 / c''(c'^{-1}(y)).
double marginal_cost_inverse_d1(const FunctionSpec& c, double y);

enum class BenefitClass { concave, s_shaped_ok, rejected };

struct AssumptionViolation {
    std::string id;
    double x;
    double residual;
};

struct AssumptionReport {
    bool h_concave = true;
    BenefitClass b_class = BenefitClass::concave;
    bool c_strictly_convex = true;
    bool x_initial_ok = true;
    std::vector<AssumptionViolation> violations;

    bool passed() const {
        return h_concave && b_class != BenefitClass::rejected && c_strictly_convex && x_initial_ok &&
               violations.empty();
    }
};

std::string_view to_string(BenefitClass c);

/// Checks the standing assumptions on a uniform grid over [x_lo, x_hi].
/// Never throws for model-level failures; they are reported.
AssumptionReport validate_assumptions(const ModelParams& m, double x_lo, double x_hi, std::size_t grid_n);

/// Total benefit of a user base of size x when users join in decreasing
/// order of preference density `pr`: the integral of pr over [0, x].
double benefit_from_preferences(const FunctionSpec& pr, double x);

/// The LQ benchmark instance used throughout the tests and examples.
ModelConfig lq_benchmark_config();

}  // namespace netgrowth
