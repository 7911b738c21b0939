#include "netgrowth/steady.hpp"

#include "netgrowth/dynamics.hpp"
#include "netgrowth/trajectory.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

namespace netgrowth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kScanNodes = 4096;

int sign_of(double v) { return (v > 0) - (v < 0); }

// Bisection to machine precision on a bracket with f(a) f(b) <= 0.
template <class F>
double bisect_root(F f, double a, double b) {
    auto tol = [](double lo, double hi) { return hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::abs(hi); };
    auto [lo, hi] = boost::math::tools::bisect(f, a, b, tol);
    return 0.5 * (lo + hi);
}

double steady_residual(const ModelParams& m, double x) {
    const HPartials hp = h_partials(m, x);
    const double denom = m.rho - hp.dx;
    if (!(denom > 0)) throw SteadyStateError("rho <= h'(x) on the steady-state search interval");
    return m.b.d1(x) / denom - m.c.d1(-hp.value);
}

// Smallest x in [lo, hi] with h(x) <= target, or NaN when h stays above it.
double first_crossing(const ModelParams& m, double target, double lo, double hi) {
    auto f = [&](double x) { return h_eta(m, x) - target; };
    if (f(lo) <= 0) return lo;
    double prev = lo;
    for (std::size_t i = 1; i < kScanNodes; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / (kScanNodes - 1.0);
        if (f(x) <= 0) return bisect_root(f, prev, x);
        prev = x;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

SteadyState solve_steady(const ModelParams& m) {
    const double x_u = bounds(m).x_u;
    const double x0 = first_crossing(m, 0.0, m.x_initial, x_u);
    if (std::isnan(x0)) throw SteadyStateError("no interior steady state (h stays positive up to x_u)");

    auto r = [&](double x) { return steady_residual(m, x); };
    std::vector<double> xs(kScanNodes), rs(kScanNodes);
    for (std::size_t i = 0; i < kScanNodes; ++i) {
        xs[i] = i + 1 == kScanNodes ? x_u : x0 + (x_u - x0) * static_cast<double>(i) / (kScanNodes - 1.0);
        rs[i] = r(xs[i]);
    }

    std::size_t changes = 0;
    std::optional<std::size_t> bracket;
    int last = 0;
    std::size_t last_idx = 0;
    for (std::size_t i = 0; i < kScanNodes; ++i) {
        const int s = sign_of(rs[i]);
        if (s == 0) {
            if (!bracket) bracket = i;
            ++changes;
            last = 0;
            continue;
        }
        if (last != 0 && s != last) {
            ++changes;
            if (!bracket) bracket = last_idx;
        }
        last = s;
        last_idx = i;
    }
    if (!bracket) throw SteadyStateError("no interior steady state (steady-state equation has no sign change)");

    double x_s;
    const std::size_t j = *bracket;
    if (rs[j] == 0) {
        x_s = xs[j];
    } else {
        std::size_t k = j + 1;
        while (sign_of(rs[k]) == sign_of(rs[j])) ++k;
        double a = xs[j], b = xs[k];
        x_s = rs[k] == 0 ? b : bisect_root(r, a, b);
        // secant polish through the two neighbouring floats
        const double d = 8 * std::numeric_limits<double>::epsilon() * std::abs(x_s);
        const double ra = r(x_s - d), rb = r(x_s + d);
        if (rb != ra) {
            const double cand = x_s - d - ra * (2 * d) / (rb - ra);
            if (std::abs(cand - x_s) <= 2 * d && std::abs(r(cand)) < std::abs(r(x_s))) x_s = cand;
        }
    }

    SteadyState ss;
    ss.x_s = x_s;
    ss.lam_s = -h_eta(m, x_s);
    ss.residual = std::abs(r(x_s));
    ss.sign_changes = changes;
    if (!(ss.lam_s > 0 && ss.lam_s < m.lambda_sup))
        throw SteadyStateError("boundary steady state outside interior regime");
    return ss;
}

bool cross_validate(const ModelParams& m, const SteadyState& ss, const ValueFunction& v, const PolicyTable& p,
                    double tol) {
    try {
        if (!(std::abs(p(ss.x_s) - ss.lam_s) <= tol)) return false;
        if (!(std::abs(m.c.d1(ss.lam_s) - v.derivative_at(ss.x_s)) <= tol)) return false;
        const Trajectory tr = integrate(m, p, 50.0 / m.rho, 1e-10);
        return std::abs(tr.x.back() - ss.x_s) <= tol;
    } catch (const std::exception&) {
        return false;
    }
}

HjbSolver default_hjb_solver(std::size_t n) {
    return [n](const ModelParams& m) { return solve_hjb(m, GridSpec::for_model(m, n)); };
}

Thresholds compute_thresholds(const ModelParams& m, const std::vector<double>& eta_grid, const HjbSolver& hjb) {
    if (eta_grid.size() < 3) throw std::invalid_argument("compute_thresholds: need at least three eta values");
    for (double e : eta_grid)
        if (!(e > 0 && e < m.eta_sup)) throw std::invalid_argument("compute_thresholds: eta values must lie in (0, eta_sup)");

    const DerivedBounds db = bounds(m);
    const double step = 1e-3 * m.eta_sup;

    // central differences of the value in eta; solves are independent
    std::vector<std::future<HjbSolution>> lo_jobs, hi_jobs;
    for (double e : eta_grid) {
        lo_jobs.push_back(std::async(std::launch::async, hjb, m.with_eta(e - step)));
        hi_jobs.push_back(std::async(std::launch::async, hjb, m.with_eta(e + step)));
    }

    Thresholds th{};
    th.zeta_sup = -kInf;
    th.zeta_tilde_inf = kInf;
    std::vector<double> nodes;
    for (std::size_t k = 0; k < eta_grid.size(); ++k) {
        const HjbSolution lo = lo_jobs[k].get();
        const HjbSolution hi = hi_jobs[k].get();
        if (nodes.empty()) nodes = lo.value.nodes;
        for (std::size_t i = 0; i < lo.value.nodes.size(); ++i) {
            const double x = lo.value.nodes[i];
            if (x < m.x_initial || x > db.x_u) continue;
            const double d = (hi.value.values[i] - lo.value.values[i]) / (2 * step);
            th.zeta_sup = std::max(th.zeta_sup, d);
            th.zeta_tilde_inf = std::min(th.zeta_tilde_inf, d);
        }
    }

    std::vector<double> etas = eta_grid;
    if (std::find(etas.begin(), etas.end(), m.eta) == etas.end()) etas.push_back(m.eta);

    th.zeta_prime_inf = kInf;
    th.zeta_tilde_prime_sup = -kInf;
    th.theta_cap = kInf;
    th.delta_cap = -kInf;
    th.rho_1l = kInf;
    th.rho_1u = -kInf;
    th.het_sup = -kInf;
    th.het_inf = kInf;
    th.m_nodes = nodes;
    th.m_profile.assign(nodes.size(), std::numeric_limits<double>::quiet_NaN());
    for (double e : etas) {
        const ModelParams me = m.with_eta(e);
        const bool on_grid = std::find(eta_grid.begin(), eta_grid.end(), e) != eta_grid.end();
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double x = nodes[i];
            const HPartials hp = h_partials(me, x);
            const double k = hp.dx_deta * hp.dx - hp.dxx * hp.deta;
            if (on_grid) {
                th.zeta_prime_inf = std::min(th.zeta_prime_inf, hp.deta);
                th.zeta_tilde_prime_sup = std::max(th.zeta_tilde_prime_sup, hp.deta);
                if (hp.deta != 0) {
                    const double rhs = k * x / ((m.rho - hp.dx) * hp.deta);
                    th.theta_cap = std::min(th.theta_cap, rhs);
                    th.delta_cap = std::max(th.delta_cap, rhs);
                }
            }
            const double b1 = m.b.d1(x), b2 = m.b.d2(x);
            if (b2 == 0 || hp.deta == 0) {
                ++th.m_excluded;
                continue;
            }
            const double mx = hp.dx + k * b1 / (hp.deta * b2);
            th.rho_1l = std::min(th.rho_1l, mx);
            th.rho_1u = std::max(th.rho_1u, mx);
            if (e == m.eta) th.m_profile[i] = mx;
        }
    }
    for (double x : nodes) {
        const double ratio = m.b.d2(x) * x / m.b.d1(x);
        th.het_sup = std::max(th.het_sup, ratio);
        th.het_inf = std::min(th.het_inf, ratio);
    }

    const double c_inf = m.c.d1(0.0);
    th.rho_lb = c_inf * th.zeta_prime_inf / th.zeta_sup;
    th.delta = th.rho_lb;
    th.rho_l = std::min({th.rho_lb, th.delta, th.rho_1l});
    th.rho_u = th.zeta_tilde_inf > 0
                   ? std::max(th.rho_1u, m.c.d1(m.lambda_sup) * th.zeta_tilde_prime_sup / th.zeta_tilde_inf)
                   : kInf;

    // v(l) = c(q(l)) so dv/dl = l q'(l)
    const double target = m.lambda_sup * marginal_cost_inverse_d1(m.c, m.lambda_sup);
    th.x1 = db.x_u;
    th.x1_clamped = false;
    for (double e : etas) {
        const double xc = first_crossing(m.with_eta(e), target, m.x_initial, db.x_u);
        if (std::isnan(xc)) continue;
        if (xc == m.x_initial) th.x1_clamped = true;
        th.x1 = std::min(th.x1, xc);
    }
    th.x2 = db.x2;
    return th;
}

SignTest sign_dlam_s_deta(const ModelParams& m) {
    const SteadyState ss = solve_steady(m);
    const double x = ss.x_s;
    const HPartials hp = h_partials(m, x);
    const double b1 = m.b.d1(x), b2 = m.b.d2(x);
    const double k = hp.dx_deta * hp.dx - hp.dxx * hp.deta;
    const double value = b2 * hp.deta - b1 / (m.rho - hp.dx) * k;

    // implicit differentiation of b'(x) - (rho - h_x) c'(-h) = 0
    const double cp = m.c.d1(ss.lam_s), cpp = m.c.d2(ss.lam_s);
    const double g_x = b2 + hp.dxx * cp + (m.rho - hp.dx) * cpp * hp.dx;

    SignTest st;
    st.value = value;
    st.sign = sign_of(value);
    st.dlam_deta = -value / g_x;

    constexpr double delta = 1e-4;
    if (m.eta >= delta) {
        st.fd_dlam_deta = (solve_steady(m.with_eta(m.eta + delta)).lam_s - solve_steady(m.with_eta(m.eta - delta)).lam_s) /
                          (2 * delta);
    } else {
        st.fd_dlam_deta = (solve_steady(m.with_eta(m.eta + delta)).lam_s - ss.lam_s) / delta;
    }
    st.agrees = std::abs(value) <= 1e-8 || sign_of(st.fd_dlam_deta) == st.sign;
    return st;
}

std::string_view to_string(Prediction p) {
    switch (p) {
    case Prediction::increase: return "increase";
    case Prediction::decrease: return "decrease";
    case Prediction::uncovered: return "uncovered";
    }
    return "?";
}

Prediction theorem4_prediction(double rho, double x, const Thresholds& th) {
    const bool patient = rho < th.rho_l;
    const bool impatient = rho > th.rho_u;
    const bool small = x < th.x1;
    const bool large = x > th.x2;
    if (patient && small) return Prediction::increase;
    if (patient && large) return Prediction::decrease;
    if (impatient && small) return Prediction::decrease;
    if (impatient && large) return Prediction::increase;
    return Prediction::uncovered;
}

std::vector<Theorem4Report> classify_theorem4(const ModelParams& m, const Thresholds& th,
                                              const std::vector<double>& xs, double eta_hi, double eta_lo,
                                              const HjbSolver& hjb) {
    if (!(eta_hi > eta_lo)) throw std::invalid_argument("classify_theorem4: need eta_hi > eta_lo");
    auto hi_job = std::async(std::launch::async, hjb, m.with_eta(eta_hi));
    const HjbSolution lo = hjb(m.with_eta(eta_lo));
    const HjbSolution hi = hi_job.get();
    std::vector<Theorem4Report> out;
    for (double x : xs) {
        Theorem4Report r;
        r.x = x;
        r.zeta_hi = hi.policy(x);
        r.zeta_lo = lo.policy(x);
        r.delta_zeta = r.zeta_lo - r.zeta_hi;
        r.prediction = theorem4_prediction(m.rho, x, th);
        switch (r.prediction) {
        case Prediction::increase: r.agreement = r.delta_zeta > 0; break;
        case Prediction::decrease: r.agreement = r.delta_zeta < 0; break;
        case Prediction::uncovered: r.agreement = true; break;
        }
        out.push_back(r);
    }
    return out;
}

Theorem4Report classify_theorem4(const ModelParams& m, const Thresholds& th, double x, double eta_hi, double eta_lo,
                                 const HjbSolver& hjb) {
    return classify_theorem4(m, th, std::vector<double>{x}, eta_hi, eta_lo, hjb).front();
}

Prediction theorem5_prediction(const ModelParams& m, const Thresholds& th) {
    // the m(x) bounds need b'' < 0; without it the regimes carry no sign information
    if (!(th.het_sup < 0)) return Prediction::uncovered;
    if (m.rho < th.rho_l) return Prediction::decrease;
    if (m.rho > th.rho_u) return Prediction::increase;
    return Prediction::uncovered;
}

Prediction theorem6_prediction(const Thresholds& th) {
    if (th.het_sup < th.theta_cap) return Prediction::increase;
    if (th.het_inf > th.delta_cap) return Prediction::decrease;
    return Prediction::uncovered;
}

}  // namespace netgrowth
