#pragma once

#include "netgrowth/model.hpp"

// boost 1.74 pchip calls unqualified isnan; the C header provides it
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace netgrowth {

/// Uniform grid for the stationary HJB solve.
struct GridSpec {
    double x_lo = 0.0;
    double x_hi = 1.0;
    std::size_t n = 2048;
    double tol = 1e-10;
    std::size_t max_iter = 500;

    /// [x_initial, x_u] with the given node count.
    static GridSpec for_model(const ModelParams& m, std::size_t n = 2048);

    double spacing() const { return (x_hi - x_lo) / static_cast<double>(n - 1); }
    double node(std::size_t i) const;
};

struct ValueFunction {
    std::vector<double> nodes;
    std::vector<double> values;
    std::vector<double> derivative;  ///< upwind estimate of the x-derivative
    double eta = 0.0;
    double residual = 0.0;           ///< scaled HJB residual at exit
    std::size_t iterations = 0;

    /// Linear interpolation; throws outside the node range.
    double value_at(double x) const;
    double derivative_at(double x) const;
};

enum class Interpolation { monotone_cubic, linear };

/// Feedback policy sampled on the solver grid.
class PolicyTable {
public:
    PolicyTable(std::vector<double> nodes, std::vector<double> zeta, Interpolation interp);

    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& zeta() const { return zeta_; }
    Interpolation interpolation() const { return interp_; }
    double x_lo() const { return nodes_.front(); }
    double x_hi() const { return nodes_.back(); }

    /// Interpolated policy, clamped to the range of the tabulated values.
    /// Throws std::out_of_range outside [x_lo, x_hi].
    double operator()(double x) const;

private:
    std::vector<double> nodes_;
    std::vector<double> zeta_;
    Interpolation interp_;
    std::optional<boost::math::interpolators::pchip<std::vector<double>>> cubic_;
    double z_min_ = 0.0, z_max_ = 0.0;
};

class HjbError : public std::runtime_error {
public:
    HjbError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

struct HjbSolution {
    ValueFunction value;
    PolicyTable policy;
};

/// Implicit upwind finite differences with Howard policy iteration.
/// Throws HjbError on non-convergence or an upwind-inconsistent grid.
HjbSolution solve_hjb(const ModelParams& m, const GridSpec& g);

/// Max over interior nodes of |rho V - max_lambda H| / (1 + max |rho V|),
/// recomputed from the tabulated values with the solver's discretization.
double hjb_residual(const ModelParams& m, const ValueFunction& v);

/// Discrete-time Bellman backward induction with brute-force control
/// search over `levels` equally spaced rates in [0, lambda_sup].
ValueFunction oracle_dp(const ModelParams& m, const GridSpec& g, double dt, double horizon,
                        std::size_t levels = 201);

/// c'(0) < V'(x) < c'(lambda_sup) at every node in [x_initial, x_u].
bool policy_interior_check(const ValueFunction& v, const ModelParams& m);

}  // namespace netgrowth
