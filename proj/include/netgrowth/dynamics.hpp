#pragma once

#include "netgrowth/model.hpp"

namespace netgrowth {

/// No-marketing net arrival rate f(x) - x / (eta_tilde + eta * g(x)).
double h_eta(const ModelParams& m, double x);

/// h and its partial derivatives in x and eta, all analytic.
struct HPartials {
    double value;
    double dx;
    double dxx;
    double deta;
    double dx_deta;
};

HPartials h_partials(const ModelParams& m, double x);

/// Closed-loop drift h(x) + lambda; lambda must lie in [0, lambda_sup].
double drift(const ModelParams& m, double x, double lambda);

struct DerivedBounds {
    double x_sup;
    double x_u;
    double x_m;
    double x2;
    double q_sup;
    double k_tilde;
};

DerivedBounds bounds(const ModelParams& m);

/// Entry model with uniform user preferences on [alpha_min, alpha_max].
/// `kappa` sets the lower population floor c_enter * (1 + kappa).
struct EntryModel {
    double c_enter = 0.0;
    double alpha_min = 0.0;
    double alpha_max = 1.0;
    double kappa = 0.1;
};

/// Fraction of arriving users whose utility of joining is positive.
double entry_fraction(const EntryModel& e, double x);

/// f(x) w(x) + lambda w(x) - x / (eta_tilde + eta g(x)).
double drift_with_entry(const ModelParams& m, const EntryModel& e, double x, double lambda);

}  // namespace netgrowth
