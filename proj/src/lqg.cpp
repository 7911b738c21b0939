#include "netgrowth/lqg.hpp"

#include "netgrowth/philox.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace netgrowth {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

// Neumaier compensated sum.
struct CompensatedSum {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

constexpr double kZ99 = 2.5758293035489004;
constexpr std::size_t kChunk = 1024;

double a_coef_of(double c, double lambda_d, double rho, double sigma2) {
    const double k = 2 * lambda_d + rho - sigma2;
    return c * (k - std::sqrt(k * k + 4 / c)) / 2;
}

}  // namespace

void LqgParams::validate() const {
    require(std::isfinite(theta) && theta > 0, "lqg: theta must be positive");
    require(std::isfinite(gamma_cap) && gamma_cap > 0, "lqg: gamma_cap must be positive");
    require(std::isfinite(c) && c > 0, "lqg: c must be positive");
    require(std::isfinite(lambda_d) && lambda_d > 0, "lqg: lambda_d must be positive");
    require(std::isfinite(rho) && rho > 0, "lqg: rho must be positive");
    require(std::isfinite(sigma) && sigma >= 0, "lqg: sigma must be non-negative");
    require(std::isfinite(x0) && x0 > 0, "lqg: x0 must be positive");
    if (eta) require(gamma_cap >= theta * *eta, "lqg: capacity condition gamma_cap >= theta * eta violated");
}

LqgSolution solve_lqg(const LqgParams& p) {
    p.validate();
    const double s2 = p.sigma * p.sigma;
    const double k = 2 * p.lambda_d + p.rho - s2;
    LqgSolution s{};
    s.a_coef = a_coef_of(p.c, p.lambda_d, p.rho, s2);
    const double e = p.rho + p.lambda_d - s.a_coef / p.c;
    s.b_coef = 2 * (s.a_coef * p.theta + p.gamma_cap) / e;
    s.c_coef = (s.b_coef * p.theta + s.b_coef * s.b_coef / (4 * p.c)) / p.rho;
    s.decay = p.lambda_d - s.a_coef / p.c;
    const double inflow = p.theta + s.b_coef / (2 * p.c);
    if (!(s.a_coef < 0 && s.decay > 0 && inflow > 0))
        throw LqgError("lqg: stability condition violated (need A < 0 and theta + B/(2c) > 0)");
    s.steady_mean = inflow / s.decay;
    s.residuals.quadratic = s.a_coef * s.a_coef / p.c - k * s.a_coef - 1;
    s.residuals.x1 = s.b_coef * e - 2 * (p.gamma_cap + s.a_coef * p.theta);
    s.residuals.x0 = p.rho * s.c_coef - s.b_coef * p.theta - s.b_coef * s.b_coef / (4 * p.c);
    return s;
}

double feedback_policy(const LqgSolution& s, const LqgParams& p, double x) {
    return s.a_coef / p.c * x + s.b_coef / (2 * p.c);
}

ExpectedPoint expected_trajectory(const LqgSolution& s, const LqgParams& p, double t) {
    if (!(t >= 0)) throw std::invalid_argument("expected_trajectory: t must be non-negative");
    const double w = std::exp(-s.decay * t);
    const double mx = s.steady_mean * (1 - w) + p.x0 * w;
    return {mx, feedback_policy(s, p, mx)};
}

McStats simulate_sde(const LqgSolution& s, const LqgParams& p, double t_end, double dt, std::size_t n_paths,
                     std::uint64_t seed, const SimulationOptions& opt) {
    require(t_end > 0, "simulate_sde: t_end must be positive");
    require(dt > 0 && dt <= 1e-3 / std::max(s.decay, p.lambda_d) * (1 + 1e-12),
            "simulate_sde: need dt <= 1e-3 / max(decay, lambda_d)");
    require(n_paths >= 10'000, "simulate_sde: need n_paths >= 10000");
    require(opt.n_records >= 1, "simulate_sde: need at least one recording time");

    const std::size_t nr = opt.n_records;
    const auto record_every =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t_end / (static_cast<double>(nr) * dt))));
    const std::size_t n_steps = record_every * nr;

    // exact mean-reverting drift step; noise enters as sigma X dW
    const double alpha = p.theta + s.b_coef / (2 * p.c);
    const double beta = s.decay;
    const double damp = std::exp(-beta * dt);
    const double shift = alpha / beta * -std::expm1(-beta * dt);
    const double vol = p.sigma * std::sqrt(dt);
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};

    struct ChunkResult {
        std::vector<CompensatedSum> sx, sxx;
        std::size_t clipped = 0;
    };
    const std::size_t n_chunks = (n_paths + kChunk - 1) / kChunk;
    std::vector<ChunkResult> results(n_chunks);

    auto run_chunk = [&](std::size_t ci) {
        ChunkResult r;
        r.sx.resize(nr);
        r.sxx.resize(nr);
        const std::size_t first = ci * kChunk, last = std::min(n_paths, first + kChunk);
        for (std::size_t path = first; path < last; ++path) {
            double x = p.x0;
            double z_spare = 0.0;
            for (std::size_t st = 0; st < n_steps; ++st) {
                double z = 0.0;
                if (vol != 0.0) {
                    if (st % 2 == 0) {
                        const std::uint64_t block = st / 2;
                        const auto w = Philox4x32::generate({static_cast<std::uint32_t>(block),
                                                             static_cast<std::uint32_t>(block >> 32),
                                                             static_cast<std::uint32_t>(path),
                                                             static_cast<std::uint32_t>(path >> 32)},
                                                            key);
                        const double u1 = 1.0 - Philox4x32::to_unit(w[0], w[1]);
                        const double u2 = Philox4x32::to_unit(w[2], w[3]);
                        const double rad = std::sqrt(-2.0 * std::log(u1));
                        const double ang = 2.0 * std::numbers::pi * u2;
                        z = rad * std::cos(ang);
                        z_spare = rad * std::sin(ang);
                    } else {
                        z = z_spare;
                    }
                }
                double next = x * damp + shift + vol * x * z;
                if (next < 0) {
                    next = 0;
                    ++r.clipped;
                }
                x = next;
                if ((st + 1) % record_every == 0) {
                    const std::size_t k = (st + 1) / record_every - 1;
                    r.sx[k].add(x);
                    r.sxx[k].add(x * x);
                }
            }
        }
        results[ci] = std::move(r);
    };

    const unsigned n_threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(n_chunks)));
    if (n_threads == 1) {
        for (std::size_t ci = 0; ci < n_chunks; ++ci) run_chunk(ci);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t ci; (ci = next.fetch_add(1)) < n_chunks;) run_chunk(ci);
            });
        for (auto& th : pool) th.join();
    }

    McStats out;
    out.n_paths = n_paths;
    out.seed = seed;
    const double n = static_cast<double>(n_paths);
    const double slope = std::abs(s.a_coef / p.c);
    for (std::size_t k = 0; k < nr; ++k) {
        CompensatedSum sx, sxx;
        for (const auto& r : results) {
            sx.add(r.sx[k].value());
            sxx.add(r.sxx[k].value());
        }
        const double mean = sx.value() / n;
        const double var = std::max(0.0, (sxx.value() - n * mean * mean) / (n - 1));
        const double half = kZ99 * std::sqrt(var / n);
        out.times.push_back(static_cast<double>((k + 1) * record_every) * dt);
        out.mean_x.push_back(mean);
        out.mean_lam.push_back(feedback_policy(s, p, mean));
        out.ci_half_width.push_back(half);
        out.ci_half_width_lam.push_back(slope * half);
    }
    for (const auto& r : results) out.clipped += r.clipped;
    return out;
}

SensitivityReport sensitivities(const LqgParams& p) {
    p.validate();
    constexpr double h = 1e-6;
    const double s2 = p.sigma * p.sigma;
    const double k = 2 * p.lambda_d + p.rho - s2;
    const double root = std::sqrt(k * k + 4 / p.c);
    const double a = a_coef_of(p.c, p.lambda_d, p.rho, s2);

    auto check = [](double an, double fd) {
        const double rel = std::abs(an - fd) / std::max(std::abs(an), 1e-12);
        return SensitivityCheck{an, fd, rel, rel <= 1e-4};
    };

    SensitivityReport rep;
    const double da_ds2 = p.c / 2 * (k / root - 1);
    const double fd_s2 = s2 >= h ? (a_coef_of(p.c, p.lambda_d, p.rho, s2 + h) - a_coef_of(p.c, p.lambda_d, p.rho, s2 - h)) / (2 * h)
                                 : (a_coef_of(p.c, p.lambda_d, p.rho, s2 + h) - a) / h;
    rep.da_dsigma2 = check(da_ds2, fd_s2);

    const double da_dl = p.c * (1 - k / root);
    rep.da_dlambda_d = check(da_dl, (a_coef_of(p.c, p.lambda_d + h, p.rho, s2) - a_coef_of(p.c, p.lambda_d - h, p.rho, s2)) / (2 * h));

    const double e = p.rho + p.lambda_d - a / p.c;
    const double db_dl =
        2 / (e * e) * ((p.rho + p.lambda_d) * p.theta * da_dl - a * p.theta + p.gamma_cap * (da_dl / p.c - 1));
    auto b_of = [&](double ld) {
        const double al = a_coef_of(p.c, ld, p.rho, s2);
        return 2 * (al * p.theta + p.gamma_cap) / (p.rho + ld - al / p.c);
    };
    rep.db_dlambda_d = check(db_dl, (b_of(p.lambda_d + h) - b_of(p.lambda_d - h)) / (2 * h));
    return rep;
}

}  // namespace netgrowth
