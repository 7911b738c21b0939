#pragma once

#include "netgrowth/hjb.hpp"
#include "netgrowth/model.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace netgrowth {

struct Trajectory {
    std::vector<double> times;
    std::vector<double> x;
    std::vector<double> lam;
    std::optional<double> converged_at;
    std::optional<double> x_limit;
};

struct IntegrateOptions {
    std::optional<double> x0;         ///< defaults to x_initial
    std::optional<double> output_dt;  ///< uniform sampling; otherwise every accepted step
    std::size_t max_steps = 10'000'000;
};

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Feedback rule evaluated on [x_lo, x_hi].
struct Feedback {
    std::function<double(double)> rule;
    double x_lo;
    double x_hi;
};

/// Dormand-Prince 5(4) solution of dx/dt = h(x) + rule(x).
Trajectory integrate(const ModelParams& m, const Feedback& fb, double t_end, double rtol,
                     const IntegrateOptions& opt = {});

/// Closed-loop trajectory under a tabulated optimal policy.
Trajectory integrate(const ModelParams& m, const PolicyTable& p, double t_end, double rtol,
                     const IntegrateOptions& opt = {});

struct MonotoneIssue {
    std::size_t index;
    std::string kind;  ///< "x_decrease" or "lam_increase"
    double amount;
};

struct MonotoneReport {
    std::vector<MonotoneIssue> issues;
    bool ok() const { return issues.empty(); }
};

/// Flags steps where x falls or lam rises by more than tol.
MonotoneReport check_monotone(const Trajectory& tr, double tol);

}  // namespace netgrowth
