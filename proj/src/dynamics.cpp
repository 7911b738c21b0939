#include "netgrowth/dynamics.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace netgrowth {

double h_eta(const ModelParams& m, double x) {
    if (!(x >= 0)) throw std::invalid_argument("h_eta: x must be non-negative");
    return m.f.value(x) - x / (m.eta_tilde + m.eta * m.g.value(x));
}

HPartials h_partials(const ModelParams& m, double x) {
    if (!(x >= 0)) throw std::invalid_argument("h_partials: x must be non-negative");
    const double g = m.g.value(x), g1 = m.g.d1(x), g2 = m.g.d2(x);
    const double eta = m.eta;
    const double d = m.eta_tilde + eta * g;
    const double d2 = d * d, d3 = d2 * d;
    HPartials p;
    p.value = m.f.value(x) - x / d;
    p.dx = m.f.d1(x) - 1.0 / d + x * eta * g1 / d2;
    p.dxx = m.f.d2(x) + (2 * eta * g1 + x * eta * g2) / d2 - 2 * x * eta * eta * g1 * g1 / d3;
    p.deta = x * g / d2;
    p.dx_deta = g / d2 + x * g1 / d2 - 2 * x * eta * g * g1 / d3;
    return p;
}

double drift(const ModelParams& m, double x, double lambda) {
    if (!(lambda >= 0 && lambda <= m.lambda_sup))
        throw std::invalid_argument("drift: lambda outside [0, lambda_sup]");
    return h_eta(m, x) + lambda;
}

DerivedBounds bounds(const ModelParams& m) {
    const double stay_sup = m.eta_tilde + m.eta_sup * m.g_sup;
    DerivedBounds b{};
    b.x_sup = (m.f_sup + m.lambda_sup) * stay_sup;

    // q = (c')^{-1}; maximize y q'(y) - c'(q'(y)) over the marginal-cost range
    const double y_lo = m.c.d1(0.0), y_hi = m.c.d1(m.lambda_sup);
    auto objective = [&](double y) {
        const double qp = marginal_cost_inverse_d1(m.c, y);
        return y * qp - m.c.d1(qp);
    };
    constexpr int scan_n = 4096;
    double best_y = y_lo, best = objective(y_lo);
    for (int i = 1; i < scan_n; ++i) {
        const double y = y_lo + (y_hi - y_lo) * i / (scan_n - 1.0);
        const double v = objective(y);
        if (v > best) {
            best = v;
            best_y = y;
        }
    }
    const double step = (y_hi - y_lo) / (scan_n - 1.0);
    const double a = std::max(y_lo, best_y - step), c = std::min(y_hi, best_y + step);
    if (c > a) {
        auto [y_ref, neg] = boost::math::tools::brent_find_minima([&](double y) { return -objective(y); }, a, c, 40);
        if (-neg > best) best = -neg;
        (void)y_ref;
    }
    b.q_sup = best;

    b.x2 = (m.f_sup + b.q_sup + m.lambda_sup) * stay_sup;
    b.k_tilde = 1e-3 * std::abs(b.x2);
    b.x_m = b.x2 + b.k_tilde;
    b.x_u = std::max(b.x_sup, b.x_m);
    return b;
}

double entry_fraction(const EntryModel& e, double x) {
    if (!(x > 0)) throw std::invalid_argument("entry_fraction: x must be positive");
    if (!(e.alpha_min < e.alpha_max)) throw std::invalid_argument("entry_fraction: need alpha_min < alpha_max");
    const double w = (e.alpha_max - std::max(e.alpha_min, e.c_enter / x)) / (e.alpha_max - e.alpha_min);
    return std::clamp(w, 0.0, 1.0);
}

double drift_with_entry(const ModelParams& m, const EntryModel& e, double x, double lambda) {
    if (!(lambda >= 0 && lambda <= m.lambda_sup))
        throw std::invalid_argument("drift_with_entry: lambda outside [0, lambda_sup]");
    if (e.c_enter > 0 && !(x > e.c_enter * (1 + e.kappa)))
        throw std::invalid_argument("drift_with_entry: x below the c_enter*(1+kappa) floor");
    const double w = entry_fraction(e, x);
    return (m.f.value(x) + lambda) * w - x / (m.eta_tilde + m.eta * m.g.value(x));
}

}  // namespace netgrowth
