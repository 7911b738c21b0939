#include "netgrowth/trajectory.hpp"

#include "netgrowth/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace netgrowth {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct OutOfDomain {};

// Cubic Hermite interpolation on one step for uniform output.
double hermite(double t0, double x0, double f0, double t1, double x1, double f1, double t) {
    const double hstep = t1 - t0;
    const double s = (t - t0) / hstep;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * x0 + (s3 - 2 * s2 + s) * hstep * f0 + (-2 * s3 + 3 * s2) * x1 +
           (s3 - s2) * hstep * f1;
}

}  // namespace

Trajectory integrate(const ModelParams& m, const Feedback& fb, double t_end, double rtol, const IntegrateOptions& opt) {
    if (!(t_end > 0)) throw std::invalid_argument("integrate: t_end must be positive");
    if (!(rtol > 0)) throw std::invalid_argument("integrate: rtol must be positive");
    if (opt.output_dt && !(*opt.output_dt > 0)) throw std::invalid_argument("integrate: output_dt must be positive");

    auto rhs = [&](double x) {
        if (!(x >= fb.x_lo && x <= fb.x_hi)) throw OutOfDomain{};
        return h_eta(m, x) + fb.rule(x);
    };
    auto policy_at = [&](double x) { return fb.rule(std::clamp(x, fb.x_lo, fb.x_hi)); };

    double x = opt.x0.value_or(m.x_initial);
    if (!(x >= fb.x_lo && x <= fb.x_hi)) throw IntegrationError("integrate: initial state outside the policy domain");

    Trajectory tr;
    auto record = [&](double t, double xv) {
        tr.times.push_back(t);
        tr.x.push_back(xv);
        tr.lam.push_back(policy_at(xv));
    };

    double t = 0.0;
    double f = rhs(x);
    record(t, x);
    double next_out = opt.output_dt ? *opt.output_dt : 0.0;
    const double atol = rtol;
    double hstep = std::min(t_end, 1e-3 * (1 + std::abs(x)) / std::max(std::abs(f), 1e-12));
    hstep = std::max(hstep, 1e-6 * t_end);
    int quiet_steps = 0;
    double err_prev = 1e-4;

    // |d rhs / dx| by a one-sided or central difference that stays in the domain
    auto local_slope = [&](double xv) {
        const double d = 1e-6 * (1 + std::abs(xv));
        const double lo = std::max(fb.x_lo, xv - d), hi = std::min(fb.x_hi, xv + d);
        return hi > lo ? std::abs(rhs(hi) - rhs(lo)) / (hi - lo) : 0.0;
    };

    for (std::size_t step = 0; t < t_end; ++step) {
        if (step >= opt.max_steps) throw IntegrationError("integrate: step budget exhausted");
        if (hstep < 1e-14 * std::max(1.0, t)) throw IntegrationError("integrate: step size underflow");
        // near equilibrium the error estimate vanishes; stay inside the real stability interval
        const double slope = local_slope(x);
        if (slope > 0) hstep = std::min(hstep, 3.0 / slope);
        const double hcur = std::min(hstep, t_end - t);

        double x_new = 0, f_new = 0, err = 0;
        bool in_domain = true;
        try {
            const double k1 = f;
            const double k2 = rhs(x + hcur * a21 * k1);
            const double k3 = rhs(x + hcur * (a31 * k1 + a32 * k2));
            const double k4 = rhs(x + hcur * (a41 * k1 + a42 * k2 + a43 * k3));
            const double k5 = rhs(x + hcur * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const double k6 = rhs(x + hcur * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            x_new = x + hcur * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            f_new = rhs(x_new);
            const double est = hcur * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * f_new);
            err = std::abs(est) / (atol + rtol * std::max(std::abs(x), std::abs(x_new)));
        } catch (const OutOfDomain&) {
            in_domain = false;
        } catch (const std::out_of_range&) {
            in_domain = false;
        }

        if (!in_domain) {
            // a stage left the table; shrink and retry, the step-size floor catches real escapes
            hstep = hcur * 0.25;
            continue;
        }
        if (err > 1.0) {
            hstep = hcur * std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        const double t_new = t + hcur;
        if (opt.output_dt) {
            while (next_out <= t_new + 1e-12 * t_end && next_out <= t_end) {
                const double xo = next_out >= t_new ? x_new : hermite(t, x, f, t_new, x_new, f_new, next_out);
                record(next_out, xo);
                next_out = tr.times.size() * *opt.output_dt;
            }
        } else {
            record(t_new, x_new);
        }

        t = t_new;
        x = x_new;
        f = f_new;

        if (std::abs(f) < rtol * (1 + std::abs(x))) {
            if (++quiet_steps == 10 && !tr.converged_at) tr.converged_at = t;
        } else {
            quiet_steps = 0;
        }

        // PI step-size controller
        const double e = std::max(err, 1e-10);
        const double fac = 0.9 * std::pow(e, -0.7 / 5) * std::pow(err_prev, 0.4 / 5);
        hstep = hcur * std::clamp(fac, 0.2, 5.0);
        err_prev = e;
    }

    if (opt.output_dt && tr.times.back() < t_end) record(t_end, x);
    if (tr.converged_at) tr.x_limit = x;
    return tr;
}

Trajectory integrate(const ModelParams& m, const PolicyTable& p, double t_end, double rtol, const IntegrateOptions& opt) {
    Feedback fb{[&p](double x) { return p(x); }, p.x_lo(), p.x_hi()};
    return integrate(m, fb, t_end, rtol, opt);
}

MonotoneReport check_monotone(const Trajectory& tr, double tol) {
    MonotoneReport rep;
    for (std::size_t i = 1; i < tr.x.size(); ++i) {
        if (tr.x[i] < tr.x[i - 1] - tol) rep.issues.push_back({i, "x_decrease", tr.x[i - 1] - tr.x[i]});
        if (tr.lam[i] > tr.lam[i - 1] + tol) rep.issues.push_back({i, "lam_increase", tr.lam[i] - tr.lam[i - 1]});
    }
    return rep;
}

}  // namespace netgrowth
