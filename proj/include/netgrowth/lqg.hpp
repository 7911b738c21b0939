#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace netgrowth {

/// Linear-quadratic specialization: constant arrivals theta, exit rate
/// lambda_d, benefit Gamma^2 - (Gamma - x)^2, cost c lambda^2 and
/// multiplicative noise sigma x dW.
struct LqgParams {
    double theta = 1.0;
    double gamma_cap = 5.0;
    double c = 1.0;
    double lambda_d = 1.0;
    double rho = 1.0;
    double sigma = 0.0;
    double x0 = 1.0;
    std::optional<double> eta;  ///< enables the capacity check Gamma >= theta * eta

    /// Throws std::invalid_argument on a violated parameter constraint.
    void validate() const;
    bool sigma_within_rho() const { return sigma <= rho; }
};

class LqgError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LqgResiduals {
    double quadratic;  ///< A^2/c - (2 lambda_d + rho - sigma^2) A - 1
    double x1;         ///< B (rho + lambda_d - A/c) - 2 (Gamma + A theta)
    double x0;         ///< rho C - B theta - B^2 / (4c)
};

struct LqgSolution {
    double a_coef;
    double b_coef;
    double c_coef;
    double decay;
    double steady_mean;
    LqgResiduals residuals;

    /// Value A x^2 + B x + C.
    double value(double x) const { return (a_coef * x + b_coef) * x + c_coef; }
};

LqgSolution solve_lqg(const LqgParams& p);

/// Optimal rate (A/c) x + B/(2c); unconstrained in sign.
double feedback_policy(const LqgSolution& s, const LqgParams& p, double x);

struct ExpectedPoint {
    double mean_x;
    double mean_lam;
};

ExpectedPoint expected_trajectory(const LqgSolution& s, const LqgParams& p, double t);

struct McStats {
    std::vector<double> times;
    std::vector<double> mean_x;
    std::vector<double> mean_lam;
    std::vector<double> ci_half_width;      ///< 99% half width for mean_x
    std::vector<double> ci_half_width_lam;  ///< 99% half width for mean_lam
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::size_t clipped = 0;  ///< steps where a path was clipped at zero
};

struct SimulationOptions {
    std::size_t n_records = 10;  ///< equally spaced recording times ending at t_end
    unsigned threads = 1;
};

/// Monte Carlo of dX = (theta + lambda(X) - lambda_d X) dt + sigma X dW.
/// Results are independent of the thread count.
McStats simulate_sde(const LqgSolution& s, const LqgParams& p, double t_end, double dt, std::size_t n_paths,
                     std::uint64_t seed, const SimulationOptions& opt = {});

struct SensitivityCheck {
    double analytic;
    double finite_difference;
    double rel_error;
    bool ok;  ///< rel_error <= 1e-4
};

struct SensitivityReport {
    SensitivityCheck da_dsigma2;
    SensitivityCheck da_dlambda_d;
    SensitivityCheck db_dlambda_d;
};

SensitivityReport sensitivities(const LqgParams& p);

}  // namespace netgrowth
