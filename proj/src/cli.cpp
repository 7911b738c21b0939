#include "netgrowth/cli.hpp"

#include "netgrowth/dynamics.hpp"
#include "netgrowth/hjb.hpp"
#include "netgrowth/steady.hpp"
#include "netgrowth/trajectory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <variant>

namespace netgrowth::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

/// Numeric or model failure; maps to exit code 1.
class RunFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Cell = std::variant<double, std::string, long long>;

std::string format_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *d);
        return buf;
    }
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
        if (!out_) throw RunFailure("cannot write " + path.string());
        write_line(std::vector<Cell>(header.begin(), header.end()));
    }

    void row(const std::vector<Cell>& cells) { write_line(cells); }
    void comment(const std::string& text) { out_ << "# " << text << '\n'; }

private:
    void write_line(const std::vector<Cell>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << format_cell(cells[i]);
        out_ << '\n';
    }

    std::ofstream out_;
    std::filesystem::path path_;
};

struct Globals {
    std::string config_path;
    std::optional<std::string> out_dir;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
};

struct Context {
    RunConfig cfg;
    RawConfig raw;
    std::filesystem::path dir;
    std::string prefix;
    unsigned threads;
    std::optional<std::uint64_t> seed;

    std::filesystem::path file(const std::string& name) const { return dir / (prefix + name); }
};

// Manifest written before a run and rewritten with the outcome afterwards.
class Manifest {
public:
    Manifest(const Context& ctx, std::string command, nlohmann::json args)
        : path_(ctx.file("manifest.json")), start_(std::chrono::steady_clock::now()) {
        doc_["artifact"] = "netgrowth";
        doc_["version"] = kVersion;
        doc_["command"] = std::move(command);
        doc_["arguments"] = std::move(args);
        doc_["config"] = ctx.cfg.resolved;
        doc_["status"] = "running";
        write();
    }

    void finish(int exit_code) {
        doc_["status"] = exit_code == 0 ? "ok" : "failed";
        doc_["exit_code"] = exit_code;
        doc_["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write();
    }

private:
    void write() {
        std::ofstream out(path_, std::ios::binary | std::ios::trunc);
        out << doc_.dump(2) << '\n';
    }

    std::filesystem::path path_;
    nlohmann::json doc_;
    std::chrono::steady_clock::time_point start_;
};

Context make_context(const Globals& g) {
    Context ctx;
    ctx.raw = read_config_file(g.config_path);
    ctx.cfg = parse_config(ctx.raw);
    ctx.dir = g.out_dir.value_or(ctx.cfg.output.directory);
    ctx.prefix = ctx.cfg.output.prefix;
    ctx.threads = std::max(1u, g.threads);
    ctx.seed = g.seed;
    std::error_code ec;
    std::filesystem::create_directories(ctx.dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + ctx.dir.string() + ": " + ec.message());
    return ctx;
}

const ModelSection& require_model(const RunConfig& cfg) {
    if (!cfg.model) throw ConfigError("config has no [model] section");
    return *cfg.model;
}

ModelParams model_or_fail(const RunConfig& cfg) {
    const ModelSection& s = require_model(cfg);
    try {
        return make_model(s);
    } catch (const std::invalid_argument& e) {
        throw RunFailure(std::string("invalid model: ") + e.what());
    }
}

GridSpec grid_for(const ModelParams& m, const GridSection& g) {
    GridSpec spec = GridSpec::for_model(m, g.n);
    if (g.x_hi) spec.x_hi = *g.x_hi;
    spec.tol = g.tol;
    spec.max_iter = g.max_iter;
    return spec;
}

HjbSolution solve_or_fail(const ModelParams& m, const GridSection& g) {
    try {
        return solve_hjb(m, grid_for(m, g));
    } catch (const HjbError& e) {
        throw RunFailure(std::string(e.what()) + " [last residual " + format_cell(e.residual()) + "]");
    } catch (const std::invalid_argument& e) {
        throw RunFailure(std::string("grid: ") + e.what());
    }
}

int cmd_validate(const Context& ctx) {
    CsvWriter csv(ctx.file("assumptions.csv"), {"kind", "id", "x", "residual"});
    const ModelSection& s = require_model(ctx.cfg);
    std::optional<ModelParams> m;
    try {
        m = make_model(s);
    } catch (const std::invalid_argument& e) {
        std::printf("%-36s %-12s %s\n", "check", "status", "detail");
        std::printf("%-36s %-12s %s\n", e.what(), "violated", "model rejected at construction");
        csv.row({std::string("violation"), std::string(e.what()), std::nan(""), std::nan("")});
        return 1;
    }
    const double x_u = bounds(*m).x_u;
    const AssumptionReport rep = validate_assumptions(*m, m->x_initial, x_u, ctx.cfg.run.validate_n);
    auto yes = [](bool b) { return std::string(b ? "pass" : "fail"); };
    std::printf("%-36s %-12s\n", "check", "status");
    std::printf("%-36s %-12s\n", "h_eta concave", yes(rep.h_concave).c_str());
    std::printf("%-36s %-12s\n", "benefit class", std::string(to_string(rep.b_class)).c_str());
    std::printf("%-36s %-12s\n", "c strictly convex", yes(rep.c_strictly_convex).c_str());
    std::printf("%-36s %-12s\n", "x_initial < f_inf*eta_tilde", yes(rep.x_initial_ok).c_str());
    csv.row({std::string("summary"), std::string("h_concave"), std::nan(""), static_cast<double>(rep.h_concave)});
    csv.row({std::string("summary"), std::string("b_class_") + std::string(to_string(rep.b_class)), std::nan(""),
             static_cast<double>(rep.b_class != BenefitClass::rejected)});
    csv.row({std::string("summary"), std::string("c_strictly_convex"), std::nan(""),
             static_cast<double>(rep.c_strictly_convex)});
    csv.row({std::string("summary"), std::string("x_initial_ok"), std::nan(""), static_cast<double>(rep.x_initial_ok)});
    for (const auto& v : rep.violations) {
        csv.row({std::string("violation"), v.id, v.x, v.residual});
        std::printf("violation: %s at x=%.6g (residual %.3g)\n", v.id.c_str(), v.x, v.residual);
    }
    return rep.passed() ? 0 : 1;
}

int cmd_solve(const Context& ctx) {
    const ModelParams m = model_or_fail(ctx.cfg);
    const HjbSolution sol = solve_or_fail(m, ctx.cfg.grid);
    {
        CsvWriter csv(ctx.file("value.csv"), {"x", "pi", "dpi_dx"});
        for (std::size_t i = 0; i < sol.value.nodes.size(); ++i)
            csv.row({sol.value.nodes[i], sol.value.values[i], sol.value.derivative[i]});
    }
    {
        CsvWriter csv(ctx.file("policy.csv"), {"x", "zeta"});
        for (std::size_t i = 0; i < sol.policy.nodes().size(); ++i) csv.row({sol.policy.nodes()[i], sol.policy.zeta()[i]});
    }
    std::printf("converged in %zu iterations, residual %.3g\n", sol.value.iterations, sol.value.residual);
    std::printf("interior regime check: %s\n", policy_interior_check(sol.value, m) ? "pass" : "fail");
    return 0;
}

int cmd_trajectory(const Context& ctx) {
    const ModelParams m = model_or_fail(ctx.cfg);
    const HjbSolution sol = solve_or_fail(m, ctx.cfg.grid);
    const RunSection& run = ctx.cfg.run;
    const double t_end = run.t_end.value_or(50.0 / m.rho);
    IntegrateOptions opt;
    opt.output_dt = t_end / static_cast<double>(run.n_out - 1);
    if (run.start_at_steady) {
        try {
            opt.x0 = solve_steady(m).x_s;
        } catch (const SteadyStateError& e) {
            throw RunFailure(e.what());
        }
    } else if (run.x0) {
        opt.x0 = *run.x0;
    }
    Trajectory tr;
    try {
        tr = integrate(m, sol.policy, t_end, run.rtol, opt);
    } catch (const IntegrationError& e) {
        throw RunFailure(e.what());
    } catch (const std::invalid_argument& e) {
        throw RunFailure(e.what());
    }
    CsvWriter csv(ctx.file("trajectory.csv"), {"t", "x", "lambda"});
    for (std::size_t i = 0; i < tr.times.size(); ++i) csv.row({tr.times[i], tr.x[i], tr.lam[i]});
    csv.comment("converged_at=" + (tr.converged_at ? format_cell(*tr.converged_at) : std::string("absent")) +
                ",x_limit=" + (tr.x_limit ? format_cell(*tr.x_limit) : std::string("absent")));
    const MonotoneReport mono = check_monotone(tr, 1e-8);
    std::printf("monotonicity: %s (%zu issues)\n", mono.ok() ? "confirmed" : "violated", mono.issues.size());
    if (!tr.converged_at) std::fprintf(stderr, "warning: trajectory did not reach the steady state by t_end\n");
    return 0;
}

int cmd_statics(const Context& ctx, std::optional<double> eta_lo, std::optional<double> eta_hi) {
    const ModelParams m = model_or_fail(ctx.cfg);
    const RunSection& run = ctx.cfg.run;
    const double lo = eta_lo ? *eta_lo : run.eta_lo.value_or(0.0);
    const double hi = eta_hi ? *eta_hi : run.eta_hi.value_or(0.0);
    if (!(lo > 0 && lo < hi && hi <= m.eta_sup)) throw ConfigError("statics: need 0 < eta_lo < eta_hi <= eta_sup");
    if (run.eta_grid_n < 3) throw ConfigError("statics: eta_grid_n must be >= 3");
    if (run.statics_points < 2) throw ConfigError("statics: statics_points must be >= 2");

    std::vector<double> eta_grid;
    for (std::size_t k = 0; k < run.eta_grid_n; ++k)
        eta_grid.push_back(m.eta_sup * static_cast<double>(k + 1) / static_cast<double>(run.eta_grid_n + 1));

    const GridSection gs = ctx.cfg.grid;
    const HjbSolver solver = [gs](const ModelParams& mm) { return solve_hjb(mm, grid_for(mm, gs)); };
    Thresholds th;
    std::optional<SignTest> sign;
    std::vector<Theorem4Report> rows;
    const double x_u = bounds(m).x_u;
    std::vector<double> xs;
    for (std::size_t i = 0; i < run.statics_points; ++i)
        xs.push_back(m.x_initial + (x_u - m.x_initial) * static_cast<double>(i) /
                                       static_cast<double>(run.statics_points - 1));
    try {
        th = compute_thresholds(m, eta_grid, solver);
        rows = classify_theorem4(m, th, xs, hi, lo, solver);
    } catch (const HjbError& e) {
        throw RunFailure(e.what());
    }
    try {
        sign = sign_dlam_s_deta(m);
    } catch (const SteadyStateError& e) {
        std::fprintf(stderr, "warning: steady-state sign test unavailable: %s\n", e.what());
    }

    {
        CsvWriter csv(ctx.file("thresholds.csv"),
                      {"rho", "rho_l", "rho_u", "rho_lb", "rho_1l", "rho_1u", "delta", "x1", "x1_clamped", "x2",
                       "theta_cap", "delta_cap", "zeta_sup", "zeta_prime_inf", "zeta_tilde_inf",
                       "zeta_tilde_prime_sup", "het_sup", "het_inf", "m_excluded", "theorem5_prediction",
                       "theorem6_prediction", "sign_value", "dlam_s_deta", "dlam_s_deta_fd"});
        const double nan = std::nan("");
        csv.row({m.rho, th.rho_l, th.rho_u, th.rho_lb, th.rho_1l, th.rho_1u, th.delta, th.x1,
                 static_cast<long long>(th.x1_clamped), th.x2, th.theta_cap, th.delta_cap, th.zeta_sup,
                 th.zeta_prime_inf, th.zeta_tilde_inf, th.zeta_tilde_prime_sup, th.het_sup, th.het_inf,
                 static_cast<long long>(th.m_excluded), std::string(to_string(theorem5_prediction(m, th))),
                 std::string(to_string(theorem6_prediction(th))), sign ? sign->value : nan,
                 sign ? sign->dlam_deta : nan, sign ? sign->fd_dlam_deta : nan});
    }
    {
        CsvWriter csv(ctx.file("statics.csv"),
                      {"x", "zeta_eta_hi", "zeta_eta_lo", "delta_zeta", "theorem4_prediction", "agreement"});
        for (const auto& r : rows)
            csv.row({r.x, r.zeta_hi, r.zeta_lo, r.delta_zeta, std::string(to_string(r.prediction)),
                     std::string(r.agreement ? "true" : "false")});
    }
    std::printf("rho=%.6g rho_l=%.6g rho_u=%.6g x1=%.6g x2=%.6g\n", m.rho, th.rho_l, th.rho_u, th.x1, th.x2);
    return 0;
}

int cmd_lqg(const Context& ctx) {
    if (!ctx.cfg.lqg) throw ConfigError("config has no [lqg] section");
    const LqgSection& l = *ctx.cfg.lqg;
    const LqgParams& p = l.params;
    LqgSolution s;
    try {
        s = solve_lqg(p);
    } catch (const LqgError& e) {
        throw RunFailure(e.what());
    } catch (const std::invalid_argument& e) {
        throw RunFailure(e.what());
    }
    const SensitivityReport sr = sensitivities(p);
    {
        CsvWriter csv(ctx.file("lqg_solution.csv"),
                      {"a_coef", "b_coef", "c_coef", "decay", "steady_mean", "residual_quadratic", "residual_x1",
                       "residual_x0", "da_dsigma2", "da_dsigma2_fd", "da_dlambda_d", "da_dlambda_d_fd",
                       "db_dlambda_d", "db_dlambda_d_fd"});
        csv.row({s.a_coef, s.b_coef, s.c_coef, s.decay, s.steady_mean, s.residuals.quadratic, s.residuals.x1,
                 s.residuals.x0, sr.da_dsigma2.analytic, sr.da_dsigma2.finite_difference, sr.da_dlambda_d.analytic,
                 sr.da_dlambda_d.finite_difference, sr.db_dlambda_d.analytic, sr.db_dlambda_d.finite_difference});
    }
    const double t_end = l.t_end.value_or(1.0 / s.decay);
    {
        CsvWriter csv(ctx.file("lqg_expected.csv"), {"t", "mean_x", "mean_lambda"});
        const std::size_t n = std::max<std::size_t>(2, l.n_expected);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = t_end * static_cast<double>(i) / static_cast<double>(n - 1);
            const ExpectedPoint e = expected_trajectory(s, p, t);
            csv.row({t, e.mean_x, e.mean_lam});
        }
    }
    const double dt = l.dt.value_or(1e-4 / s.decay);
    SimulationOptions opt;
    opt.n_records = l.n_records;
    opt.threads = ctx.threads;
    const std::uint64_t seed = ctx.seed.value_or(l.seed);
    McStats mc;
    try {
        mc = simulate_sde(s, p, t_end, dt, l.n_paths, seed, opt);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    CsvWriter csv(ctx.file("lqg_mc.csv"), {"t", "mc_mean_x", "ci_half_width", "expected_x", "within_ci",
                                           "mc_mean_lambda", "ci_half_width_lambda", "expected_lambda"});
    std::size_t outside = 0;
    for (std::size_t k = 0; k < mc.times.size(); ++k) {
        const ExpectedPoint e = expected_trajectory(s, p, mc.times[k]);
        // roundoff floor so the noiseless case (zero width) compares sensibly
        const bool within = std::abs(mc.mean_x[k] - e.mean_x) <= mc.ci_half_width[k] + 1e-12 * (1 + std::abs(e.mean_x));
        outside += !within;
        csv.row({mc.times[k], mc.mean_x[k], mc.ci_half_width[k], e.mean_x, std::string(within ? "true" : "false"),
                 mc.mean_lam[k], mc.ci_half_width_lam[k], e.mean_lam});
    }
    std::printf("A'=%.9g B'=%.9g C'=%.9g steady_mean=%.9g\n", s.a_coef, s.b_coef, s.c_coef, s.steady_mean);
    std::printf("monte carlo: %zu of %zu recorded times outside the 99%% CI, %zu clipping events\n", outside,
                mc.times.size(), mc.clipped);
    return 0;
}

std::vector<std::string> split_values(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int cmd_sweep(const Context& ctx, const std::string& param, const std::string& values_arg) {
    const auto values = split_values(values_arg);
    if (values.size() < 2) throw ConfigError("sweep: need at least two values");
    const bool lqg = param.rfind("lqg.", 0) == 0;

    // validate every override up front so usage errors exit 2 before any run
    std::vector<RunConfig> cfgs;
    for (const auto& v : values) {
        RawConfig raw = ctx.raw;
        apply_override(raw, param, v);
        cfgs.push_back(parse_config(raw));
        if (lqg ? !cfgs.back().lqg : !cfgs.back().model) throw ConfigError("sweep: config lacks the swept section");
    }

    const std::vector<std::string> header =
        lqg ? std::vector<std::string>{"value", "status", "steady_mean", "a_coef", "b_coef", "c_coef", "decay"}
            : std::vector<std::string>{"value", "status", "x_s", "lam_s", "sign_value", "dlam_s_deta"};
    std::vector<std::vector<Cell>> rows(values.size());
    auto run_one = [&](std::size_t i) {
        const double nan = std::nan("");
        try {
            if (lqg) {
                const LqgSolution s = solve_lqg(cfgs[i].lqg->params);
                rows[i] = {values[i], std::string("ok"), s.steady_mean, s.a_coef, s.b_coef, s.c_coef, s.decay};
            } else {
                const ModelParams m = make_model(*cfgs[i].model);
                const SteadyState ss = solve_steady(m);
                const SignTest st = sign_dlam_s_deta(m);
                rows[i] = {values[i], std::string("ok"), ss.x_s, ss.lam_s, st.value, st.dlam_deta};
            }
        } catch (const std::exception&) {
            rows[i] = {values[i], std::string("error")};
            for (std::size_t k = 2; k < header.size(); ++k) rows[i].push_back(nan);
        }
    };
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(ctx.threads, values.size()); ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < values.size();) run_one(i);
        });
    for (auto& th : pool) th.join();

    CsvWriter csv(ctx.file("sweep.csv"), header);
    bool failed = false;
    for (const auto& r : rows) {
        // values are echoed verbatim as given on the command line
        csv.row(r);
        failed |= std::get<std::string>(r[1]) != "ok";
    }
    return failed ? 1 : 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Optimal advertising under network effects: HJB, steady state and LQG tools", "netgrowth"};
    app.require_subcommand(1);
    Globals g;
    std::string out_dir;
    std::uint64_t seed = 0;
    auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides [output] directory)");
    app.add_option("--threads", g.threads, "Worker threads for sweeps and Monte Carlo")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "Random seed for Monte Carlo (overrides [lqg] seed)");
    app.add_option("--config", g.config_path, "Configuration file")->required();

    auto* validate = app.add_subcommand("validate", "Check the model's standing assumptions");
    auto* solve = app.add_subcommand("solve", "Solve the HJB equation; writes value.csv and policy.csv");
    auto* trajectory = app.add_subcommand("trajectory", "Integrate the closed-loop optimal path");
    auto* statics = app.add_subcommand("statics", "Comparative statics in eta");
    double eta_lo = 0, eta_hi = 0;
    auto* lo_opt = statics->add_option("--eta-lo", eta_lo, "Lower interaction time");
    auto* hi_opt = statics->add_option("--eta-hi", eta_hi, "Upper interaction time");
    auto* lqg = app.add_subcommand("lqg", "Stochastic linear-quadratic model");
    auto* sweep = app.add_subcommand("sweep", "Batch over one scalar parameter");
    std::string param, values;
    sweep->add_option("--param", param, "Parameter such as model.eta, model.b.a or lqg.sigma")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required();
    app.fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (*out_opt) g.out_dir = out_dir;
    if (*seed_opt) g.seed = seed;

    std::optional<Context> ctx;
    try {
        ctx = make_context(g);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    nlohmann::json args = {{"config", g.config_path}, {"threads", ctx->threads}};
    if (g.seed) args["seed"] = *g.seed;
    if (g.out_dir) args["out"] = *g.out_dir;
    std::string name = app.get_subcommands().front()->get_name();
    if (name == "statics") {
        if (*lo_opt) args["eta_lo"] = eta_lo;
        if (*hi_opt) args["eta_hi"] = eta_hi;
    }
    if (name == "sweep") {
        args["param"] = param;
        args["values"] = values;
    }

    std::optional<Manifest> manifest;
    int code = 0;
    try {
        manifest.emplace(*ctx, name, args);
        if (*validate) code = cmd_validate(*ctx);
        else if (*solve) code = cmd_solve(*ctx);
        else if (*trajectory) code = cmd_trajectory(*ctx);
        else if (*statics)
            code = cmd_statics(*ctx, *lo_opt ? std::optional<double>(eta_lo) : std::nullopt,
                               *hi_opt ? std::optional<double>(eta_hi) : std::nullopt);
        else if (*lqg) code = cmd_lqg(*ctx);
        else if (*sweep) code = cmd_sweep(*ctx, param, values);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        code = 2;
    } catch (const RunFailure& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        code = 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        code = 1;
    }
    if (manifest) manifest->finish(code);
    return code;
}

}  // namespace netgrowth::cli
