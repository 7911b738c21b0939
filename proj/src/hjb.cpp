#include "netgrowth/hjb.hpp"

#include "netgrowth/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace netgrowth {

namespace {

// Index of the left end of the cell containing x, for sorted nodes.
std::size_t cell_index(const std::vector<double>& nodes, double x) {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    std::size_t j = it == nodes.begin() ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
    return std::min(j, nodes.size() - 2);
}

double lerp_on(const std::vector<double>& nodes, const std::vector<double>& vals, double x) {
    if (!(x >= nodes.front() && x <= nodes.back())) throw std::out_of_range("interpolation point outside the grid");
    const std::size_t j = cell_index(nodes, x);
    const double t = (x - nodes[j]) / (nodes[j + 1] - nodes[j]);
    return vals[j] + t * (vals[j + 1] - vals[j]);
}

// Per-node data and the exact upwind maximization of the Hamiltonian.
struct Discretization {
    const ModelParams& m;
    std::vector<double> x, h, b;
    double dx;

    Discretization(const ModelParams& model, const GridSpec& g) : m(model), x(g.n), h(g.n), b(g.n), dx(g.spacing()) {
        for (std::size_t i = 0; i < g.n; ++i) {
            x[i] = g.node(i);
            h[i] = h_eta(m, x[i]);
            b[i] = m.b.value(x[i]);
        }
    }

    std::size_t size() const { return x.size(); }

    struct Choice {
        double lam;
        int dir;  // +1 forward difference, -1 backward, 0 zero drift
        double ham;
    };

    double hamiltonian(std::size_t i, double lam, double p) const { return b[i] - m.c.value(lam) + p * (h[i] + lam); }

    Choice best(std::size_t i, const std::vector<double>& v) const {
        const std::size_t n = size();
        Choice out{0.0, 0, -std::numeric_limits<double>::infinity()};
        const double hi = h[i];
        const double lo_fwd = std::max(0.0, -hi);
        if (i + 1 < n && lo_fwd <= m.lambda_sup) {
            const double p = (v[i + 1] - v[i]) / dx;
            const double lam = std::clamp(marginal_cost_inverse(m.c, p), lo_fwd, m.lambda_sup);
            out = {lam, hi + lam > 0 ? 1 : 0, hamiltonian(i, lam, p)};
        }
        if (i > 0 && -hi >= 0) {
            const double p = (v[i] - v[i - 1]) / dx;
            const double lam = std::clamp(marginal_cost_inverse(m.c, p), 0.0, std::min(m.lambda_sup, -hi));
            const double hm = hamiltonian(i, lam, p);
            if (hm > out.ham) out = {lam, hi + lam < 0 ? -1 : 0, hm};
        }
        return out;
    }

    double evaluate(std::size_t i, const std::vector<double>& v, double lam, int dir) const {
        if (dir > 0) return hamiltonian(i, lam, (v[i + 1] - v[i]) / dx);
        if (dir < 0) return hamiltonian(i, lam, (v[i] - v[i - 1]) / dx);
        return b[i] - m.c.value(lam);
    }

    double derivative(std::size_t i, const std::vector<double>& v, double lam, int dir) const {
        if (dir > 0) return (v[i + 1] - v[i]) / dx;
        if (dir < 0) return (v[i] - v[i - 1]) / dx;
        return m.c.d1(lam);
    }

    // Implicit solve of rho V = b - c(lam) + mu D V for a fixed policy (Thomas algorithm).
    void solve_linear(const std::vector<double>& lam, const std::vector<int>& dir, std::vector<double>& v) const {
        const std::size_t n = size();
        std::vector<double> lower(n, 0.0), diag(n, m.rho), upper(n, 0.0), rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double mu = h[i] + lam[i];
            rhs[i] = b[i] - m.c.value(lam[i]);
            if (dir[i] > 0) {
                diag[i] += mu / dx;
                upper[i] = -mu / dx;
            } else if (dir[i] < 0) {
                diag[i] -= mu / dx;
                lower[i] = mu / dx;
            }
        }
        for (std::size_t i = 1; i < n; ++i) {
            const double w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        v.resize(n);
        v[n - 1] = rhs[n - 1] / diag[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) v[i] = (rhs[i] - upper[i] * v[i + 1]) / diag[i];
    }
};

void check_grid(const GridSpec& g) {
    if (g.n < 64) throw std::invalid_argument("grid: need n >= 64");
    if (!(g.x_lo < g.x_hi)) throw std::invalid_argument("grid: need x_lo < x_hi");
    if (!(g.tol > 0)) throw std::invalid_argument("grid: tol must be positive");
}

}  // namespace

GridSpec GridSpec::for_model(const ModelParams& m, std::size_t n) {
    GridSpec g;
    g.x_lo = m.x_initial;
    g.x_hi = bounds(m).x_u;
    g.n = n;
    return g;
}

double GridSpec::node(std::size_t i) const {
    if (i + 1 == n) return x_hi;
    return x_lo + spacing() * static_cast<double>(i);
}

double ValueFunction::value_at(double x) const { return lerp_on(nodes, values, x); }
double ValueFunction::derivative_at(double x) const { return lerp_on(nodes, derivative, x); }

PolicyTable::PolicyTable(std::vector<double> nodes, std::vector<double> zeta, Interpolation interp)
    : nodes_(std::move(nodes)), zeta_(std::move(zeta)), interp_(interp) {
    if (nodes_.size() != zeta_.size() || nodes_.size() < 4)
        throw std::invalid_argument("PolicyTable: need at least four matching nodes and values");
    z_min_ = *std::min_element(zeta_.begin(), zeta_.end());
    z_max_ = *std::max_element(zeta_.begin(), zeta_.end());
    if (interp_ == Interpolation::monotone_cubic) {
        auto xs = nodes_;
        auto ys = zeta_;
        cubic_.emplace(std::move(xs), std::move(ys));
    }
}

double PolicyTable::operator()(double x) const {
    if (!(x >= nodes_.front() && x <= nodes_.back())) throw std::out_of_range("policy table domain exceeded");
    const double z = cubic_ ? (*cubic_)(x) : lerp_on(nodes_, zeta_, x);
    return std::clamp(z, z_min_, z_max_);
}

HjbSolution solve_hjb(const ModelParams& m, const GridSpec& g) {
    check_grid(g);
    const Discretization d(m, g);
    const std::size_t n = d.size();

    // state constraint: drift must point inward at both ends for every admissible rate
    if (!(d.h[0] > 0)) throw HjbError("drift not upwind-consistent at x_lo (h(x_lo) <= 0)", NAN);
    if (!(d.h[n - 1] + m.lambda_sup <= 0))
        throw HjbError("drift not upwind-consistent at x_hi (grid must extend to x_sup)", NAN);

    std::vector<double> lam(n, 0.0), v;
    std::vector<int> dir(n);
    for (std::size_t i = 0; i < n; ++i) dir[i] = d.h[i] > 0 ? 1 : (d.h[i] < 0 ? -1 : 0);

    double residual = std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= g.max_iter; ++it) {
        d.solve_linear(lam, dir, v);
        double scale = 0.0, gap = 0.0;
        std::vector<Discretization::Choice> choice(n);
        for (std::size_t i = 0; i < n; ++i) {
            scale = std::max(scale, std::abs(m.rho * v[i]));
            choice[i] = d.best(i, v);
            gap = std::max(gap, choice[i].ham - d.evaluate(i, v, lam[i], dir[i]));
        }
        residual = gap / (1.0 + scale);
        for (std::size_t i = 0; i < n; ++i) {
            lam[i] = choice[i].lam;
            dir[i] = choice[i].dir;
        }
        if (residual <= g.tol) {
            ValueFunction vf;
            vf.nodes = d.x;
            vf.values = v;
            vf.derivative.resize(n);
            for (std::size_t i = 0; i < n; ++i) vf.derivative[i] = d.derivative(i, v, lam[i], dir[i]);
            vf.eta = m.eta;
            vf.residual = residual;
            vf.iterations = it;
            const auto interp =
                m.b.family() == Family::s_shaped_benefit ? Interpolation::linear : Interpolation::monotone_cubic;
            PolicyTable pt(d.x, lam, interp);
            return {std::move(vf), std::move(pt)};
        }
    }
    throw HjbError("HJB policy iteration did not converge (residual " + std::to_string(residual) + ")", residual);
}

double hjb_residual(const ModelParams& m, const ValueFunction& v) {
    GridSpec g;
    g.n = v.nodes.size();
    g.x_lo = v.nodes.front();
    g.x_hi = v.nodes.back();
    check_grid(g);
    const Discretization d(m.with_eta(v.eta), g);
    double scale = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) scale = std::max(scale, std::abs(m.rho * v.values[i]));
    for (std::size_t i = 0; i < d.size(); ++i)
        worst = std::max(worst, std::abs(m.rho * v.values[i] - d.best(i, v.values).ham));
    return worst / (1.0 + scale);
}

ValueFunction oracle_dp(const ModelParams& m, const GridSpec& g, double dt, double horizon, std::size_t levels) {
    check_grid(g);
    if (!(dt > 0)) throw std::invalid_argument("oracle_dp: dt must be positive");
    if (!(horizon >= 10.0 / m.rho)) throw std::invalid_argument("oracle_dp: horizon must be >= 10/rho");
    if (levels < 101) throw std::invalid_argument("oracle_dp: need at least 101 control levels");

    const std::size_t n = g.n;
    std::vector<double> x(n), h(n), b(n);
    double max_drift = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = g.node(i);
        h[i] = h_eta(m, x[i]);
        b[i] = m.b.value(x[i]);
        max_drift = std::max({max_drift, std::abs(h[i]), std::abs(h[i] + m.lambda_sup)});
    }
    const double sp = g.spacing();
    if (!(dt * max_drift < 4 * sp)) throw std::invalid_argument("oracle_dp: need dt * max|drift| < 4 * grid spacing");

    // transitions are time-invariant: precompute target cell, weight and running reward
    const double disc = std::exp(-m.rho * dt);
    const double flow = -std::expm1(-m.rho * dt) / m.rho;
    const std::size_t nl = levels;
    std::vector<std::size_t> cell(n * nl);
    std::vector<double> weight(n * nl), reward(n * nl);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t l = 0; l < nl; ++l) {
            const double lam = m.lambda_sup * static_cast<double>(l) / static_cast<double>(nl - 1);
            const double y = std::clamp(x[i] + (h[i] + lam) * dt, g.x_lo, g.x_hi);
            std::size_t j = std::min(static_cast<std::size_t>((y - g.x_lo) / sp), n - 2);
            const std::size_t k = i * nl + l;
            cell[k] = j;
            weight[k] = std::clamp((y - x[j]) / sp, 0.0, 1.0);
            reward[k] = (b[i] - m.c.value(lam)) * flow;
        }
    }

    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt));
    std::vector<double> v(n, 0.0), next(n);
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < nl; ++l) {
                const std::size_t k = i * nl + l;
                const std::size_t j = cell[k];
                const double cont = v[j] + weight[k] * (v[j + 1] - v[j]);
                best = std::max(best, reward[k] + disc * cont);
            }
            next[i] = best;
        }
        v.swap(next);
    }

    ValueFunction vf;
    vf.nodes = x;
    vf.values = v;
    vf.derivative.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) vf.derivative[i] = (v[1] - v[0]) / sp;
        else if (i + 1 == n) vf.derivative[i] = (v[i] - v[i - 1]) / sp;
        else vf.derivative[i] = (v[i + 1] - v[i - 1]) / (2 * sp);
    }
    vf.eta = m.eta;
    vf.residual = 0.0;
    vf.iterations = steps;
    return vf;
}

bool policy_interior_check(const ValueFunction& v, const ModelParams& m) {
    const double x_u = bounds(m).x_u;
    const double lo = m.c.d1(0.0), hi = m.c.d1(m.lambda_sup);
    for (std::size_t i = 0; i < v.nodes.size(); ++i) {
        const double x = v.nodes[i];
        if (x < m.x_initial || x > x_u) continue;
        if (!(v.derivative[i] > lo && v.derivative[i] < hi)) return false;
    }
    return true;
}

}  // namespace netgrowth
