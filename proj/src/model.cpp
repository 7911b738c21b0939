#include "netgrowth/model.hpp"

#include "netgrowth/dynamics.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace netgrowth {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ModelError(what);
}

bool is_arrival_family(Family f) {
    return f == Family::constant || f == Family::affine_saturating || f == Family::logistic;
}

void check_arrival_spec(const FunctionSpec& s, const char* role) {
    const std::string r(role);
    require(is_arrival_family(s.family()),
            r + ": family must be constant, affine_saturating or logistic (bounded, increasing)");
    if (s.family() == Family::logistic) require(s.param("slope") >= 0, r + ": logistic slope must be >= 0");
}

}  // namespace

ModelParams ModelParams::with_eta(double new_eta) const {
    ModelParams m = *this;
    m.eta = new_eta;
    return m;
}

ModelParams ModelParams::with_rho(double new_rho) const {
    ModelParams m = *this;
    m.rho = new_rho;
    return m;
}

ModelParams build_model(const ModelConfig& cfg) {
    require(std::isfinite(cfg.eta_tilde) && cfg.eta_tilde >= 0, "eta_tilde must be non-negative");
    require(std::isfinite(cfg.eta) && cfg.eta >= 0, "eta must be non-negative");
    const double eta_sup = cfg.eta_sup.value_or(cfg.eta);
    require(std::isfinite(eta_sup) && eta_sup >= cfg.eta, "eta_sup must be >= eta");
    require(std::isfinite(cfg.rho) && cfg.rho > 0, "rho must be positive");
    require(std::isfinite(cfg.lambda_sup) && cfg.lambda_sup > 0, "lambda_sup must be positive");
    require(std::isfinite(cfg.x_initial) && cfg.x_initial > 0, "x_initial must be positive");
    if (cfg.c_enter) require(*cfg.c_enter >= 0, "c_enter must be non-negative");

    check_arrival_spec(cfg.f, "f");
    check_arrival_spec(cfg.g, "g");

    const auto bf = cfg.b.family();
    require(bf == Family::power_benefit || bf == Family::s_shaped_benefit || bf == Family::constant,
            "b: family must be power_benefit, s_shaped_benefit or constant");
    if (bf == Family::constant) require(cfg.b.param("value") >= 0, "b: constant benefit must be non-negative");

    const auto cf = cfg.c.family();
    if (cf == Family::quadratic) {
        require(cfg.c.param("c") > 0, "c: cost must be strictly convex (quadratic coefficient c > 0)");
        require(cfg.c.param("c_lin") >= 0, "c: cost must be increasing on [0, lambda_sup] (c_lin >= 0)");
    } else if (cf == Family::power) {
        require(cfg.c.param("coef") > 0 && cfg.c.param("exponent") > 1,
                "c: cost must be strictly convex (power with coef > 0, exponent > 1)");
    } else {
        throw ModelError("c: cost must be strictly convex (quadratic or power family)");
    }

    const auto [f_inf, f_sup] = cfg.f.range();
    const auto [g_inf, g_sup] = cfg.g.range();
    require(f_inf > 0, "f: direct arrivals must be bounded below by a positive constant");
    require(g_inf >= 0, "g: interactions must be non-negative");
    require(cfg.x_initial < f_inf * cfg.eta_tilde, "x_initial < f_inf*eta_tilde");

    return ModelParams{cfg.f,          cfg.g,  cfg.b,   cfg.c, cfg.eta_tilde, cfg.eta, eta_sup, cfg.rho,
                       cfg.lambda_sup, cfg.x_initial, f_inf, f_sup, g_sup, cfg.c_enter};
}

double marginal_cost_inverse(const FunctionSpec& c, double y) {
    switch (c.family()) {
    case Family::quadratic: return (y - c.param("c_lin")) / (2 * c.param("c"));
    case Family::power: {
        const double k = c.param("coef"), p = c.param("exponent");
        const double mag = std::pow(std::abs(y) / (k * p), 1.0 / (p - 1));
        return y < 0 ? -mag : mag;
    }
    default: throw std::invalid_argument("marginal_cost_inverse: unsupported cost family");
    }
}

double marginal_cost_inverse_d1(const FunctionSpec& c, double y) {
    return 1.0 / c.d2(marginal_cost_inverse(c, y));
}

std::string_view to_string(BenefitClass c) {
    switch (c) {
    case BenefitClass::concave: return "concave";
    case BenefitClass::s_shaped_ok: return "s_shaped_ok";
    case BenefitClass::rejected: return "rejected";
    }
    return "?";
}

AssumptionReport validate_assumptions(const ModelParams& m, double x_lo, double x_hi, std::size_t grid_n) {
    if (!(x_lo < x_hi)) throw std::invalid_argument("validate_assumptions: need x_lo < x_hi");
    if (grid_n < 16) throw std::invalid_argument("validate_assumptions: need grid_n >= 16");

    constexpr double rel_tol = 1e-9;
    AssumptionReport rep;
    const double dx = (x_hi - x_lo) / static_cast<double>(grid_n - 1);
    std::vector<double> xs(grid_n), hv(grid_n), bv(grid_n);
    for (std::size_t i = 0; i < grid_n; ++i) {
        xs[i] = i + 1 == grid_n ? x_hi : x_lo + dx * static_cast<double>(i);
        hv[i] = h_eta(m, xs[i]);
        bv[i] = m.b.value(xs[i]);
    }

    if (!(m.x_initial < m.f_inf * m.eta_tilde)) {
        rep.x_initial_ok = false;
        rep.violations.push_back({"x_initial < f_inf*eta_tilde", m.x_initial, m.x_initial - m.f_inf * m.eta_tilde});
    }

    // second differences; scale keeps the check relative to the magnitudes involved
    auto second_diff_excess = [&](const std::vector<double>& v, std::size_t i) {
        const double d2 = v[i + 1] - 2 * v[i] + v[i - 1];
        const double scale = std::abs(v[i + 1]) + 2 * std::abs(v[i]) + std::abs(v[i - 1]);
        return d2 - rel_tol * std::max(scale, 1e-300);
    };

    for (std::size_t i = 1; i + 1 < grid_n; ++i) {
        const double ex = second_diff_excess(hv, i);
        if (ex > 0) {
            rep.h_concave = false;
            rep.violations.push_back({"h_eta concave", xs[i], ex});
        }
    }

    const bool s_shaped = m.b.family() == Family::s_shaped_benefit;
    const double t_thr = s_shaped ? m.b.param("t_threshold") : 0.0;
    bool b_concave_all = true, b_concave_tail = true;
    for (std::size_t i = 1; i + 1 < grid_n; ++i) {
        const double ex = second_diff_excess(bv, i);
        if (ex > 0) {
            b_concave_all = false;
            if (xs[i - 1] >= t_thr) {
                b_concave_tail = false;
                rep.violations.push_back({"b concave", xs[i], ex});
            }
        }
    }
    if (b_concave_all) {
        rep.b_class = BenefitClass::concave;
    } else if (s_shaped && b_concave_tail && t_thr < m.f_inf * m.eta_tilde) {
        rep.b_class = BenefitClass::s_shaped_ok;
    } else {
        rep.b_class = BenefitClass::rejected;
        if (s_shaped && !(t_thr < m.f_inf * m.eta_tilde))
            rep.violations.push_back({"t_threshold < f_inf*eta_tilde", t_thr, t_thr - m.f_inf * m.eta_tilde});
        else if (b_concave_tail)
            rep.violations.push_back({"b concave", x_lo, 0.0});
    }

    // strictly increasing marginal cost on the admissible control set
    const std::size_t nc = std::max<std::size_t>(grid_n, 64);
    double prev = m.c.d1(0.0);
    for (std::size_t i = 1; i < nc; ++i) {
        const double lam = m.lambda_sup * static_cast<double>(i) / static_cast<double>(nc - 1);
        const double cur = m.c.d1(lam);
        if (!(cur > prev)) {
            rep.c_strictly_convex = false;
            rep.violations.push_back({"c' strictly increasing", lam, prev - cur});
            break;
        }
        prev = cur;
    }

    for (std::size_t i = 0; i < grid_n; ++i) {
        const double fv = m.f.value(xs[i]), gv = m.g.value(xs[i]);
        if (fv < m.f_inf * (1 - 1e-12) || fv > m.f_sup * (1 + 1e-12))
            rep.violations.push_back({"f within [f_inf, f_sup]", xs[i], fv < m.f_inf ? m.f_inf - fv : fv - m.f_sup});
        if (gv < 0 || gv > m.g_sup * (1 + 1e-12))
            rep.violations.push_back({"g within [0, g_sup]", xs[i], gv < 0 ? -gv : gv - m.g_sup});
    }
    return rep;
}

double benefit_from_preferences(const FunctionSpec& pr, double x) {
    if (!(x >= 0)) throw std::invalid_argument("benefit_from_preferences: x must be non-negative");
    if (x == 0) return 0.0;

    // split at kinks so each piece is smooth; tanh-sinh absorbs endpoint singularities
    std::vector<double> cuts{0.0};
    for (double k : pr.kinks())
        if (k > 0 && k < x) cuts.push_back(k);
    cuts.push_back(x);

    boost::math::quadrature::tanh_sinh<double> integrator;
    auto fn = [&pr](double s) { return pr.value(s); };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrator.integrate(fn, cuts[i], cuts[i + 1], 1e-14);
    return total;
}

ModelConfig lq_benchmark_config() { return ModelConfig{}; }

}  // namespace netgrowth
