#pragma once

#include "netgrowth/hjb.hpp"
#include "netgrowth/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace netgrowth {

struct SteadyState {
    double x_s;
    double lam_s;
    double residual;
    std::size_t sign_changes;
};

class SteadyStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Root of b'(x) / (rho - h'(x)) - c'(-h(x)) on the region where h < 0.
SteadyState solve_steady(const ModelParams& m);

/// Three-way agreement of the steady state with the solved value function,
/// the policy table and the closed-loop trajectory limit.
bool cross_validate(const ModelParams& m, const SteadyState& ss, const ValueFunction& v, const PolicyTable& p,
                    double tol);

using HjbSolver = std::function<HjbSolution(const ModelParams&)>;

/// Solves on GridSpec::for_model(m, n); the grid depends only on eta_sup,
/// so solves across an eta grid share nodes.
HjbSolver default_hjb_solver(std::size_t n = 2048);

struct Thresholds {
    double rho_l, rho_u;
    double rho_lb, rho_1l, rho_1u;
    double delta;
    double x1, x2;
    bool x1_clamped;  ///< h(x_initial) already below the x1 target
    double theta_cap, delta_cap;
    double zeta_sup, zeta_prime_inf, zeta_tilde_inf, zeta_tilde_prime_sup;
    double het_sup, het_inf;  ///< sup and inf of b''(x) x / b'(x)
    std::size_t m_excluded;   ///< nodes where m(x) is singular
    std::vector<double> m_nodes, m_profile;
};

/// Comparative-statics thresholds with d Pi / d eta from central
/// differences of HJB solves across `eta_grid`.
Thresholds compute_thresholds(const ModelParams& m, const std::vector<double>& eta_grid, const HjbSolver& hjb);

struct SignTest {
    int sign;           ///< sign of `value`
    double value;       ///< sign expression at x_s
    double dlam_deta;   ///< implicit-function derivative of lam_s in eta
    double fd_dlam_deta;
    bool agrees;        ///< sign(value) == sign(fd), vacuous when |value| <= 1e-8
};

SignTest sign_dlam_s_deta(const ModelParams& m);

enum class Prediction { increase, decrease, uncovered };
std::string_view to_string(Prediction p);

struct Theorem4Report {
    double x;
    double zeta_hi, zeta_lo, delta_zeta;
    Prediction prediction;
    bool agreement;  ///< observed sign matches; true when uncovered
};

/// Regime prediction for (rho, x) against the computed thresholds.
Prediction theorem4_prediction(double rho, double x, const Thresholds& th);

Theorem4Report classify_theorem4(const ModelParams& m, const Thresholds& th, double x, double eta_hi, double eta_lo,
                                 const HjbSolver& hjb);

/// Same as classify_theorem4 at many x from one pair of solves.
std::vector<Theorem4Report> classify_theorem4(const ModelParams& m, const Thresholds& th,
                                              const std::vector<double>& xs, double eta_hi, double eta_lo,
                                              const HjbSolver& hjb);

/// Predicted sign of d lam_s / d eta from the discount-rate regime
/// (increase means lam_s rises with eta).
Prediction theorem5_prediction(const ModelParams& m, const Thresholds& th);

/// Predicted sign of d lam_s / d eta from the heterogeneity regime.
Prediction theorem6_prediction(const Thresholds& th);

}  // namespace netgrowth
