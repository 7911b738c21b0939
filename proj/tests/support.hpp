#pragma once

#include "netgrowth/model.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace netgrowth::testing {

inline ModelParams lq_benchmark() { return build_model(lq_benchmark_config()); }

/// Saturating direct arrivals with a square-root benefit.
inline ModelConfig curved_a_config() {
    ModelConfig c = lq_benchmark_config();
    c.f = FunctionSpec::affine_saturating(1.0, 1.5, 1.0);
    c.b = FunctionSpec::power_benefit(0.5);
    return c;
}

/// Logistic interactions; the concave f keeps h concave.
inline ModelConfig curved_b_config() {
    ModelConfig c = lq_benchmark_config();
    c.f = FunctionSpec::affine_saturating(1.0, 2.0, 1.0);
    c.g = FunctionSpec::logistic(0.5, 1.5, 2.0, 0.5);
    c.b = FunctionSpec::power_benefit(0.5);
    return c;
}

inline ModelParams curved_a() { return build_model(curved_a_config()); }
inline ModelParams curved_b() { return build_model(curved_b_config()); }

/// Twenty assumption-passing instances spanning discounting, benefit
/// curvature, interaction strength, cost shape and arrival families.
inline std::vector<ModelConfig> sweep_configs() {
    std::vector<ModelConfig> out;
    const double rhos[] = {0.05, 0.1, 0.3, 0.9};
    const double as[] = {0.3, 0.5, 0.8, 1.0};
    for (int i = 0; i < 20; ++i) {
        ModelConfig c = (i % 3 == 0) ? lq_benchmark_config() : (i % 3 == 1 ? curved_a_config() : curved_b_config());
        c.rho = rhos[i % 4];
        c.b = FunctionSpec::power_benefit(as[(i / 4) % 4], 1.0 + 0.25 * (i % 2));
        c.eta = 0.3 + 0.05 * (i % 5);
        c.eta_sup = 0.6;
        c.c = (i % 4 == 3) ? FunctionSpec::power(0.8, 1.8) : FunctionSpec::quadratic(0.5 + 0.25 * (i % 3), 0.05 * (i % 2));
        out.push_back(c);
    }
    return out;
}

/// Central difference with a step scaled to the magnitude of x.
inline double central_diff(const std::function<double(double)>& fn, double x, double rel = 1e-5) {
    const double h = rel * std::max(1.0, std::abs(x));
    return (fn(x + h) - fn(x - h)) / (2 * h);
}

inline double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace netgrowth::testing
