#include "netgrowth/dynamics.hpp"
#include "netgrowth/steady.hpp"
#include "netgrowth/trajectory.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace netgrowth;
namespace nt = netgrowth::testing;

TEST_CASE("LQ benchmark converges to the closed-form steady state") {
    const ModelParams m = nt::lq_benchmark();
    const HjbSolution s = solve_hjb(m, GridSpec::for_model(m));
    const Trajectory tr = integrate(m, s.policy, 50 / m.rho, 1e-10);
    REQUIRE(tr.converged_at.has_value());
    REQUIRE(tr.x_limit.has_value());
    CHECK(tr.x.back() == doctest::Approx(1 + 1 / 2.2).epsilon(1e-8));
    CHECK(tr.lam.back() == doctest::Approx(1 / 2.2).epsilon(1e-8));
    CHECK(*tr.x_limit == doctest::Approx(1 + 1 / 2.2).epsilon(1e-8));
    CHECK(check_monotone(tr, 1e-8).ok());
}

TEST_CASE("starting at the steady state stays there") {
    const ModelParams m = nt::lq_benchmark();
    const double x_s = 1 + 1 / 2.2, lam_s = 1 / 2.2;
    const Feedback fb{[lam_s](double) { return lam_s; }, m.x_initial, 20.0};
    IntegrateOptions opt;
    opt.x0 = x_s;
    opt.output_dt = 1.0;
    const Trajectory tr = integrate(m, fb, 30.0, 1e-10, opt);
    for (double x : tr.x) CHECK(std::abs(x - x_s) <= 1e-10 * (1 + x_s));
    CHECK(check_monotone(tr, 1e-8).ok());
}

TEST_CASE("zero control follows the linear closed form") {
    const ModelParams m = nt::lq_benchmark();
    const Feedback fb{[](double) { return 0.0; }, m.x_initial, 20.0};
    IntegrateOptions opt;
    opt.output_dt = 0.25;
    const Trajectory tr = integrate(m, fb, 20.0, 1e-10, opt);
    REQUIRE(tr.times.size() == 81);
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        CHECK(tr.x[i] == doctest::Approx(1 + (m.x_initial - 1) * std::exp(-tr.times[i])).epsilon(1e-8));
    CHECK(tr.x.back() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("stored rates reproduce the policy table") {
    const ModelParams m = nt::curved_b();
    const HjbSolution s = solve_hjb(m, GridSpec::for_model(m));
    IntegrateOptions opt;
    opt.output_dt = 0.5;
    const Trajectory tr = integrate(m, s.policy, 100.0, 1e-9, opt);
    const double x_sup = bounds(m).x_sup;
    for (std::size_t i = 0; i < tr.x.size(); ++i) {
        CHECK(tr.lam[i] == s.policy(tr.x[i]));
        CHECK(tr.x[i] >= m.x_initial - 1e-12);
        CHECK(tr.x[i] <= x_sup);
        CHECK(tr.lam[i] >= 0);
        CHECK(tr.lam[i] <= m.lambda_sup);
    }
}

TEST_CASE("short horizon leaves convergence unset") {
    const ModelParams m = nt::lq_benchmark();
    const HjbSolution s = solve_hjb(m, GridSpec::for_model(m));
    const Trajectory tr = integrate(m, s.policy, 1.0, 1e-10);
    CHECK_FALSE(tr.converged_at.has_value());
    CHECK_FALSE(tr.x_limit.has_value());
}

TEST_CASE("leaving the policy domain is an error") {
    const ModelParams m = nt::lq_benchmark();
    const Feedback fb{[](double) { return 10.0; }, m.x_initial, 2.0};
    CHECK_THROWS_AS(integrate(m, fb, 50.0, 1e-9), IntegrationError);
    IntegrateOptions opt;
    opt.x0 = 3.0;
    CHECK_THROWS(integrate(m, fb, 1.0, 1e-9, opt));
    CHECK_THROWS(integrate(m, fb, -1.0, 1e-9));
}

TEST_CASE("monotonicity report flags violations") {
    Trajectory tr;
    tr.times = {0, 1, 2, 3};
    tr.x = {1.0, 1.1, 1.05, 1.2};
    tr.lam = {0.5, 0.4, 0.45, 0.3};
    const MonotoneReport r = check_monotone(tr, 1e-8);
    REQUIRE(r.issues.size() == 2);
    CHECK(r.issues[0].index == 2);
    CHECK(r.issues[0].amount == doctest::Approx(0.05));
    CHECK(check_monotone(tr, 0.1).ok());
}

TEST_CASE("s-shaped benefit: any rate increase happens below the threshold") {
    ModelConfig c = lq_benchmark_config();
    c.b = FunctionSpec::s_shaped_benefit(0.45, 2.0, 8.0);
    c.x_initial = 0.1;
    const ModelParams m = build_model(c);
    const HjbSolution s = solve_hjb(m, GridSpec::for_model(m));
    IntegrateOptions opt;
    opt.output_dt = 0.05;
    const Trajectory tr = integrate(m, s.policy, 100.0, 1e-9, opt);
    for (const auto& issue : check_monotone(tr, 1e-8).issues) {
        CHECK(issue.kind == "lam_increase");
        CHECK(tr.x[issue.index - 1] < 0.45);
    }
}

TEST_CASE("sweep instances converge monotonically") {
    for (const auto& cfg : nt::sweep_configs()) {
        const ModelParams m = build_model(cfg);
        const HjbSolution s = solve_hjb(m, GridSpec::for_model(m, 8192));
        const Trajectory tr = integrate(m, s.policy, 50 / m.rho, 1e-10);
        CHECK(check_monotone(tr, 1e-8).ok());
        const double x_s = solve_steady(m).x_s;
        CHECK(std::abs(tr.x.back() - x_s) <= 1e-3 * x_s);
    }
}
