#include "netgrowth/dynamics.hpp"
#include "netgrowth/steady.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace netgrowth;
namespace nt = netgrowth::testing;

TEST_CASE("LQ benchmark steady state in closed form") {
    for (double rho : {0.1, 0.5, 0.9}) {
        const ModelParams m = nt::lq_benchmark().with_rho(rho);
        const SteadyState ss = solve_steady(m);
        const double lam = 1 / (2 * (rho + 1));
        CHECK(std::abs(ss.x_s - (1 + lam)) <= 1e-10);
        CHECK(std::abs(ss.lam_s - lam) <= 1e-10);
        CHECK(ss.sign_changes == 1);
    }
    CHECK(solve_steady(nt::lq_benchmark().with_rho(0.9)).lam_s == doctest::Approx(0.263158).epsilon(1e-6));
}

TEST_CASE("steady state is unique and satisfies its defining equations on the sweep") {
    for (const auto& cfg : nt::sweep_configs()) {
        const ModelParams m = build_model(cfg);
        const SteadyState ss = solve_steady(m);
        CHECK(ss.sign_changes == 1);
        CHECK(ss.lam_s == doctest::Approx(-h_eta(m, ss.x_s)).epsilon(1e-12));
        CHECK(ss.lam_s > 0);
        CHECK(ss.lam_s < m.lambda_sup);
        const HPartials hp = h_partials(m, ss.x_s);
        const double r = m.b.d1(ss.x_s) / (m.rho - hp.dx) - m.c.d1(-hp.value);
        CHECK(std::abs(r) <= 1e-12 * (1 + std::abs(m.c.d1(ss.lam_s))));
    }
}

TEST_CASE("steady-state failures") {
    auto message = [](const ModelConfig& c) {
        try {
            solve_steady(build_model(c));
        } catch (const SteadyStateError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    // without benefit the only root sits where the rate reaches zero
    ModelConfig zero = lq_benchmark_config();
    zero.b = FunctionSpec::constant(0.0);
    CHECK(message(zero) == "boundary steady state outside interior regime");

    ModelConfig low = lq_benchmark_config();
    low.lambda_sup = 0.3;
    CHECK(message(low).rfind("no interior steady state", 0) == 0);

}

TEST_CASE("cross validation of steady state, value slope, policy and trajectory") {
    const ModelParams m = nt::lq_benchmark();
    const HjbSolution s = solve_hjb(m, GridSpec::for_model(m));
    const SteadyState ss = solve_steady(m);
    CHECK(cross_validate(m, ss, s.value, s.policy, 1e-3));

    SteadyState moved = ss;
    moved.x_s += 0.1;
    CHECK_FALSE(cross_validate(m, moved, s.value, s.policy, 1e-3));

    const HjbSolution shifted = solve_hjb(m.with_eta(m.eta - 0.1), GridSpec::for_model(m));
    CHECK_FALSE(cross_validate(m, ss, shifted.value, shifted.policy, 1e-3));
}

TEST_CASE("thresholds on the LQ benchmark") {
    const ModelParams m = nt::lq_benchmark();
    const Thresholds th = compute_thresholds(m, {0.125, 0.25, 0.375}, default_hjb_solver());
    CHECK(th.theta_cap <= th.delta_cap);
    CHECK(th.rho_l <= th.rho_u);
    CHECK(th.x2 == doctest::Approx(20.0).epsilon(1e-6));
    CHECK(th.x1 >= m.x_initial);
    CHECK(th.x1 <= th.x2);
    // linear benefit: b'' x / b' vanishes identically and m(x) is singular everywhere
    CHECK(th.het_sup == 0.0);
    CHECK(th.het_inf == 0.0);
    CHECK(th.m_excluded > 0);
    CHECK(th.m_excluded % th.m_nodes.size() == 0);
    for (double v : th.m_profile) CHECK(std::isnan(v));
    CHECK(th.rho_1l == std::numeric_limits<double>::infinity());
    const bool heterogeneous = 0 < th.theta_cap, homogeneous = 0 > th.delta_cap;
    CHECK(heterogeneous != homogeneous);
    CHECK(theorem6_prediction(th) == (homogeneous ? Prediction::decrease : Prediction::increase));
    CHECK(th.zeta_sup > 0);
    CHECK(th.zeta_tilde_inf > 0);
    CHECK(th.zeta_tilde_inf <= th.zeta_sup);
}

TEST_CASE("thresholds on a curved instance") {
    const ModelParams m = nt::curved_b();
    const Thresholds th = compute_thresholds(m, {0.125, 0.25, 0.375}, default_hjb_solver());
    CHECK(th.theta_cap <= th.delta_cap);
    CHECK(th.rho_l <= th.rho_u);
    CHECK(th.rho_1l <= th.rho_1u);
    CHECK(th.het_sup == doctest::Approx(-0.5));
    CHECK(th.het_inf == doctest::Approx(-0.5));
    CHECK(th.m_excluded < th.m_nodes.size());
    CHECK_THROWS_AS(compute_thresholds(m, {0.2, 0.3}, default_hjb_solver()), std::invalid_argument);
}

TEST_CASE("analytic sign of the steady-rate response agrees with finite differences") {
    int checked = 0;
    for (const auto& cfg : nt::sweep_configs()) {
        const ModelParams m = build_model(cfg);
        const SignTest st = sign_dlam_s_deta(m);
        // independent oracle: re-solve at eta +- 1e-4
        const double d = 1e-4;
        const double fd = (solve_steady(m.with_eta(m.eta + d)).lam_s - solve_steady(m.with_eta(m.eta - d)).lam_s) / (2 * d);
        CHECK(st.fd_dlam_deta == doctest::Approx(fd).epsilon(1e-9));
        CHECK(st.dlam_deta == doctest::Approx(fd).epsilon(1e-4));
        if (std::abs(st.value) > 1e-8) {
            CHECK(st.sign == (fd > 0 ? 1 : -1));
            CHECK(st.agrees);
            ++checked;
        }
    }
    CHECK(checked >= 15);
}

TEST_CASE("sign test exemplars") {
    ModelConfig het = lq_benchmark_config();
    het.b = FunctionSpec::power_benefit(0.2);
    het.rho = 1.0;
    const SignTest h = sign_dlam_s_deta(build_model(het));
    CHECK(h.sign < 0);
    CHECK(h.fd_dlam_deta < 0);

    ModelConfig hom = lq_benchmark_config();
    hom.rho = 2.0;
    const SignTest g = sign_dlam_s_deta(build_model(hom));
    CHECK(g.sign > 0);
    CHECK(g.fd_dlam_deta > 0);
}

TEST_CASE("regime predictions from thresholds") {
    Thresholds th{};
    th.rho_l = 0.2;
    th.rho_u = 1.0;
    th.x1 = 0.8;
    th.x2 = 5.0;
    CHECK(theorem4_prediction(0.1, 0.5, th) == Prediction::increase);
    CHECK(theorem4_prediction(0.1, 6.0, th) == Prediction::decrease);
    CHECK(theorem4_prediction(2.0, 0.5, th) == Prediction::decrease);
    CHECK(theorem4_prediction(2.0, 6.0, th) == Prediction::increase);
    CHECK(theorem4_prediction(0.5, 0.5, th) == Prediction::uncovered);
    CHECK(theorem4_prediction(0.1, 2.0, th) == Prediction::uncovered);
    // ties at a threshold are not covered
    CHECK(theorem4_prediction(0.2, 0.5, th) == Prediction::uncovered);
    CHECK(theorem4_prediction(0.1, 0.8, th) == Prediction::uncovered);
    CHECK(theorem4_prediction(1.0, 6.0, th) == Prediction::uncovered);

    th.theta_cap = 0.1;
    th.delta_cap = 0.3;
    th.het_sup = th.het_inf = -0.2;
    CHECK(theorem6_prediction(th) == Prediction::increase);
    th.het_sup = th.het_inf = 0.5;
    CHECK(theorem6_prediction(th) == Prediction::decrease);
    th.het_sup = th.het_inf = 0.2;
    CHECK(theorem6_prediction(th) == Prediction::uncovered);

    const ModelParams m = nt::curved_a();
    th.het_sup = -0.5;
    CHECK(theorem5_prediction(m.with_rho(0.1), th) == Prediction::decrease);
    CHECK(theorem5_prediction(m.with_rho(2.0), th) == Prediction::increase);
    CHECK(theorem5_prediction(m.with_rho(0.5), th) == Prediction::uncovered);
    th.het_sup = 0.0;
    CHECK(theorem5_prediction(m.with_rho(0.1), th) == Prediction::uncovered);
}

TEST_CASE("quadrant classification reports the observed policy shift") {
    const ModelParams m = nt::curved_a();
    const HjbSolver solver = default_hjb_solver();
    const Thresholds th = compute_thresholds(m, {0.125, 0.25, 0.375}, solver);
    const std::vector<double> xs{m.x_initial, 1.0, 2.0, 8.0};
    const auto rows = classify_theorem4(m, th, xs, 0.5, 0.4, solver);
    REQUIRE(rows.size() == xs.size());
    const HjbSolution hi = solver(m.with_eta(0.5)), lo = solver(m.with_eta(0.4));
    for (const auto& r : rows) {
        CHECK(r.delta_zeta == doctest::Approx(lo.policy(r.x) - hi.policy(r.x)));
        CHECK(r.prediction == theorem4_prediction(m.rho, r.x, th));
        if (r.prediction == Prediction::uncovered) CHECK(r.agreement);
    }
    CHECK_THROWS_AS(classify_theorem4(m, th, xs, 0.4, 0.4, solver), std::invalid_argument);
}
