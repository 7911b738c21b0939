#include "netgrowth/dynamics.hpp"
#include "netgrowth/model.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace netgrowth;
namespace nt = netgrowth::testing;

TEST_CASE("LQ benchmark builds and passes every assumption") {
    const ModelParams m = nt::lq_benchmark();
    CHECK(m.f_inf == 1.0);
    CHECK(m.f_sup == 1.0);
    CHECK(m.g_sup == 1.0);
    CHECK(m.eta_sup == 0.5);
    const auto rep = validate_assumptions(m, m.x_initial, bounds(m).x_u, 512);
    CHECK(rep.passed());
    CHECK(rep.h_concave);
    CHECK(rep.b_class == BenefitClass::concave);
}

TEST_CASE("build_model is deterministic") {
    const ModelParams a = nt::curved_b(), b = nt::curved_b();
    CHECK(a.f_inf == b.f_inf);
    CHECK(a.f_sup == b.f_sup);
    CHECK(a.g_sup == b.g_sup);
    CHECK(a.g.params() == b.g.params());
    CHECK(h_eta(a, 0.77) == h_eta(b, 0.77));
}

TEST_CASE("x_initial must stay below f_inf * eta_tilde") {
    ModelConfig c = lq_benchmark_config();
    c.x_initial = 0.6;
    try {
        build_model(c);
        FAIL("expected ModelError");
    } catch (const ModelError& e) {
        CHECK(std::string(e.what()) == "x_initial < f_inf*eta_tilde");
    }
    c.x_initial = 0.5;
    CHECK_THROWS_AS(build_model(c), ModelError);
}

TEST_CASE("build_model rejects invalid inputs") {
    auto with = [](auto mutate) {
        ModelConfig c = lq_benchmark_config();
        mutate(c);
        return c;
    };
    CHECK_THROWS_AS(build_model(with([](ModelConfig& c) { c.c = FunctionSpec::quadratic(-1.0); })), ModelError);
    CHECK_THROWS_AS(build_model(with([](ModelConfig& c) { c.c = FunctionSpec::power(1.0, 1.0); })), ModelError);
    CHECK_THROWS_AS(build_model(with([](ModelConfig& c) { c.c = FunctionSpec::constant(1.0); })), ModelError);
    CHECK_THROWS_AS(build_model(with([](ModelConfig& c) { c.rho = -0.1; })), ModelError);
    CHECK_THROWS_AS(build_model(with([](ModelConfig& c) { c.eta = -1; })), ModelError);
    CHECK_THROWS_AS(build_model(with([](ModelConfig& c) { c.eta_tilde = -1; })), ModelError);
    CHECK_THROWS_AS(build_model(with([](ModelConfig& c) { c.lambda_sup = 0; })), ModelError);
    CHECK_THROWS_AS(build_model(with([](ModelConfig& c) { c.eta_sup = 0.1; })), ModelError);
    CHECK_THROWS_AS(build_model(with([](ModelConfig& c) { c.f = FunctionSpec::power_benefit(0.5); })), ModelError);
    CHECK_THROWS_AS(FunctionSpec::power_benefit(1.5), std::invalid_argument);
}

TEST_CASE("square-root benefit is accepted as concave") {
    ModelConfig c = lq_benchmark_config();
    c.b = FunctionSpec::power_benefit(0.5);
    const ModelParams m = build_model(c);
    const auto rep = validate_assumptions(m, m.x_initial, bounds(m).x_u, 1024);
    CHECK(rep.b_class == BenefitClass::concave);
    CHECK(rep.passed());
}

TEST_CASE("steep logistic interactions make h convex and are located") {
    ModelConfig c = lq_benchmark_config();
    c.g = FunctionSpec::logistic(0.2, 2.0, 12.0, 1.0);
    const ModelParams m = build_model(c);
    const auto rep = validate_assumptions(m, m.x_initial, 3.0, 1024);
    CHECK_FALSE(rep.h_concave);
    CHECK_FALSE(rep.passed());
    bool located = false;
    for (const auto& v : rep.violations) {
        if (v.id != "h_eta concave") continue;
        CHECK(std::isfinite(v.residual));
        CHECK(v.residual > 0);
        // independent second-difference check at the reported location
        const double dx = 1e-3;
        const double d2 = h_eta(m, v.x + dx) - 2 * h_eta(m, v.x) + h_eta(m, v.x - dx);
        located |= d2 > 0;
    }
    CHECK(located);
}

TEST_CASE("s-shaped benefit is classified by its threshold") {
    ModelConfig c = lq_benchmark_config();
    c.b = FunctionSpec::s_shaped_benefit(0.4, 1.0, 8.0);
    const ModelParams ok = build_model(c);
    const auto rep = validate_assumptions(ok, 0.01, bounds(ok).x_u, 1024);
    CHECK(rep.b_class == BenefitClass::s_shaped_ok);

    c.b = FunctionSpec::s_shaped_benefit(0.6, 1.0, 8.0);
    const ModelParams bad = build_model(c);
    const auto rej = validate_assumptions(bad, 0.01, bounds(bad).x_u, 1024);
    CHECK(rej.b_class == BenefitClass::rejected);
    REQUIRE_FALSE(rej.violations.empty());
    for (const auto& v : rej.violations) CHECK(std::isfinite(v.residual));
}

TEST_CASE("validate_assumptions checks its own inputs") {
    const ModelParams m = nt::lq_benchmark();
    CHECK_THROWS_AS(validate_assumptions(m, 1.0, 1.0, 64), std::invalid_argument);
    CHECK_THROWS_AS(validate_assumptions(m, 0.4, 1.0, 8), std::invalid_argument);
}

TEST_CASE("benefit from preferences") {
    CHECK(benefit_from_preferences(FunctionSpec::constant(1.0), 2.0) == doctest::Approx(2.0).epsilon(1e-12));
    // density a s^(a-1) reproduces x^a
    CHECK(benefit_from_preferences(FunctionSpec::power(0.5, -0.5), 0.25) == doctest::Approx(0.5).epsilon(1e-10));
    // max(0, 1 - s): triangle of area 1/2
    CHECK(benefit_from_preferences(FunctionSpec::ramp(1.0, 1.0), 3.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(benefit_from_preferences(FunctionSpec::ramp(1.0, 1.0), 0.0) == 0.0);
    CHECK_THROWS_AS(benefit_from_preferences(FunctionSpec::constant(1.0), -1.0), std::invalid_argument);
}

TEST_CASE("benefit from a nonincreasing density is concave") {
    for (const auto& pr : {FunctionSpec::constant(0.7), FunctionSpec::ramp(1.0, 0.6), FunctionSpec::power(0.3, -0.7),
                           FunctionSpec::ramp(2.0, 3.0)}) {
        std::vector<double> v;
        for (int i = 0; i <= 200; ++i) v.push_back(benefit_from_preferences(pr, 0.02 + 0.015 * i));
        for (std::size_t i = 1; i + 1 < v.size(); ++i) CHECK(v[i + 1] - 2 * v[i] + v[i - 1] <= 1e-9);
    }
}

TEST_CASE("accepted instances keep f and g inside their bounds") {
    for (const auto& cfg : nt::sweep_configs()) {
        const ModelParams m = build_model(cfg);
        const double x_u = bounds(m).x_u;
        for (int i = 0; i <= 4000; ++i) {
            const double x = m.x_initial + (x_u - m.x_initial) * i / 4000.0;
            CHECK(m.f.value(x) >= m.f_inf * (1 - 1e-12));
            CHECK(m.f.value(x) <= m.f_sup * (1 + 1e-12));
            CHECK(m.g.value(x) >= 0);
            CHECK(m.g.value(x) <= m.g_sup * (1 + 1e-12));
        }
    }
}

TEST_CASE("marginal cost is strictly increasing and inverted exactly") {
    for (const auto& cfg : nt::sweep_configs()) {
        const ModelParams m = build_model(cfg);
        for (int i = 0; i < 500; ++i) {
            const double lam = m.lambda_sup * i / 500.0;
            CHECK(m.c.d1(lam + 1e-3) > m.c.d1(lam));
            CHECK(marginal_cost_inverse(m.c, m.c.d1(lam)) == doctest::Approx(lam).epsilon(1e-10).scale(1.0));
        }
        const double y = m.c.d1(1.3);
        const double fd = nt::central_diff([&](double t) { return marginal_cost_inverse(m.c, t); }, y);
        CHECK(marginal_cost_inverse_d1(m.c, y) == doctest::Approx(fd).epsilon(1e-6));
    }
}
