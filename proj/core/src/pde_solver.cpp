#include "bsfb/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bsfb/error.hpp"
#include "bsfb/numerics.hpp"

namespace bsfb::pde {

namespace {

// u on the new level at an edge node, as g + w1 u_near + w2 u_next.
struct Closure {
    double g = 0.0;
    double w1 = 0.0;
    double w2 = 0.0;
};

struct Stencil {
    double cm, c0, cp;  // coefficients of L = u_xx − u_x
    explicit Stencil(double h)
        : cm(1.0 / (h * h) + 0.5 / h), c0(-2.0 / (h * h)), cp(1.0 / (h * h) - 0.5 / h) {}
};

struct Operator {
    double half_sigma2;
    std::vector<double> beta;  // b S^{k−1}

    [[nodiscard]] double G(double L, std::size_t i) const {
        const double D = 1.0 - beta[i] * L;
        return -half_sigma2 * L / (D * D);
    }
    [[nodiscard]] double dG(double L, std::size_t i) const {
        const double X = beta[i] * L;
        const double D = 1.0 - X;
        return -half_sigma2 * (1.0 + X) / (D * D * D);
    }
};

Operator make_operator(const GridSpec& grid, const ModelParams& params) {
    Operator op{0.5 * params.sigma() * params.sigma(), std::vector<double>(grid.nS)};
    for (int i = 0; i < grid.nS; ++i) {
        op.beta[i] = params.b() * std::pow(grid.S(i), params.k() - 1.0);
    }
    return op;
}

void require_log_grid(const GridSpec& grid) {
    grid.validate();
    if (!grid.log_space) fail(ErrorKind::ParamError, "the PDE solver needs a log-spaced grid");
}

double discrete_L(const std::vector<double>& u, std::size_t i, const Stencil& st) {
    return st.cm * u[i - 1] + st.c0 * u[i] + st.cp * u[i + 1];
}

std::pair<Closure, Closure> closures(const GridSpec& grid, const Boundary& bc, BoundaryMode mode) {
    if (mode == BoundaryMode::dirichlet) return {{bc.left, 0.0, 0.0}, {bc.right, 0.0, 0.0}};
    // Linear in S at both ends, so u_SS = 0 there.
    const int n = grid.nS;
    const double aL = (grid.S(0) - grid.S(1)) / (grid.S(2) - grid.S(1));
    const double aR = (grid.S(n - 1) - grid.S(n - 2)) / (grid.S(n - 3) - grid.S(n - 2));
    return {{0.0, 1.0 - aL, aL}, {0.0, 1.0 - aR, aR}};
}

void close_edges(std::vector<double>& u, const Closure& left, const Closure& right) {
    const std::size_t n = u.size();
    u[0] = left.g + left.w1 * u[1] + left.w2 * u[2];
    u[n - 1] = right.g + right.w1 * u[n - 2] + right.w2 * u[n - 3];
}

void check_denominator(const std::vector<double>& before, const std::vector<double>& after,
                       const Operator& op, const Stencil& st, double den_tol, double t) {
    std::vector<std::size_t> bad;
    for (std::size_t i = 1; i + 1 < after.size(); ++i) {
        const double X1 = op.beta[i] * discrete_L(after, i, st);
        const double X0 = op.beta[i] * discrete_L(before, i, st);
        const double D1 = 1.0 - X1;
        if (!std::isfinite(D1) || std::fabs(D1) < den_tol * std::max(1.0, std::fabs(X1)) ||
            (D1 > 0.0) != (1.0 - X0 > 0.0)) {
            bad.push_back(i);
        }
    }
    if (bad.empty()) return;
    std::ostringstream msg;
    msg << "denominator 1 - bS^{k+1}u_SS vanishes or changes sign at t=" << t << ", nodes";
    for (std::size_t j = 0; j < std::min<std::size_t>(bad.size(), 8); ++j) msg << ' ' << bad[j];
    if (bad.size() > 8) msg << " ... (" << bad.size() << " total)";
    fail(ErrorKind::DenominatorBreach, msg.str());
}

bool newton_step(const std::vector<double>& old, std::vector<double>& u, double dt,
                 const Operator& op, const Stencil& st, const Closure& left, const Closure& right,
                 const SolverOptions& opt) {
    const std::size_t n = old.size();
    const std::size_t m = n - 2;
    std::vector<double> g_old(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) g_old[i] = op.G(discrete_L(old, i, st), i);

    auto residual = [&](const std::vector<double>& w, std::size_t i, double L) {
        return w[i] - old[i] - dt * opt.theta * op.G(L, i) - dt * (1.0 - opt.theta) * g_old[i];
    };
    auto same_side = [&](const std::vector<double>& w) {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double D0 = 1.0 - op.beta[i] * discrete_L(old, i, st);
            const double D = 1.0 - op.beta[i] * discrete_L(w, i, st);
            if (!std::isfinite(D) || (D > 0.0) != (D0 > 0.0)) return false;
        }
        return true;
    };
    auto residual_norm = [&](const std::vector<double>& w) {
        double r = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) r = std::max(r, std::fabs(residual(w, i, discrete_L(w, i, st))));
        return r;
    };

    // Start from the old level shifted by a linear-in-x blend of the edge
    // changes; a bare edge update would put a kink next to each boundary.
    u = old;
    close_edges(u, left, right);
    const double dl = u[0] - old[0];
    const double dr = u[n - 1] - old[n - 1];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double xi = static_cast<double>(i) / static_cast<double>(n - 1);
        u[i] += (1.0 - xi) * dl + xi * dr;
    }
    close_edges(u, left, right);
    if (!same_side(u)) {
        u = old;
        close_edges(u, left, right);
    }

    std::vector<double> lower(m), diag(m), upper(m), rhs(m), trial(n);
    double norm = residual_norm(u);
    for (int it = 0; it < opt.max_newton; ++it) {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double L = discrete_L(u, i, st);
            const double gp = op.dG(L, i);
            const std::size_t r = i - 1;
            rhs[r] = -residual(u, i, L);
            double dm = st.cm, d0 = st.c0, dp = st.cp;
            if (i == 1) {
                d0 += st.cm * left.w1;
                dp += st.cm * left.w2;
            }
            if (i == n - 2) {
                d0 += st.cp * right.w1;
                dm += st.cp * right.w2;
            }
            const double scale = -dt * opt.theta * gp;
            lower[r] = scale * dm;
            diag[r] = 1.0 + scale * d0;
            upper[r] = scale * dp;
        }
        if (!numerics::solve_tridiagonal(lower, diag, upper, rhs)) return false;
        // Backtrack until every denominator keeps its side and the residual
        // does not grow.
        double alpha = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30 && !accepted; ++k, alpha *= 0.5) {
            trial = u;
            for (std::size_t r = 0; r < m; ++r) trial[r + 1] += alpha * rhs[r];
            close_edges(trial, left, right);
            if (!same_side(trial)) continue;
            const double tn = residual_norm(trial);
            if (std::isfinite(tn) && (tn <= norm || alpha < 1e-3)) {
                accepted = true;
                norm = tn;
            }
        }
        if (!accepted) return false;
        alpha *= 2.0;
        double step_norm = 0.0;
        double size = 1.0;
        for (std::size_t r = 0; r < m; ++r) {
            step_norm = std::max(step_norm, std::fabs(alpha * rhs[r]));
            size = std::max(size, std::fabs(trial[r + 1]));
        }
        u.swap(trial);
        if (!std::isfinite(step_norm)) return false;
        if (alpha == 1.0 && step_norm <= opt.newton_tol * size) return true;
    }
    return false;
}

std::vector<double> explicit_steps(const std::vector<double>& old, double dt, const Operator& op,
                                   const Stencil& st, double h, const Closure& left,
                                   const Closure& right) {
    const std::size_t n = old.size();
    std::vector<double> u = old;
    std::vector<double> rate(n, 0.0);
    double done = 0.0;
    const double total = std::fabs(dt);
    const double sign = dt > 0.0 ? 1.0 : -1.0;
    std::size_t guard = 0;
    while (done < total) {
        double amp = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            amp = std::max(amp, std::fabs(op.dG(discrete_L(u, i, st), i)));
        }
        // dt ≤ 0.2 h²/max(σ²|g'|) with dG/dL = −(σ²/2) g'.
        const double limit = amp > 0.0 ? 0.1 * h * h / amp : total;
        const double sub = std::min(limit, total - done);
        for (std::size_t i = 1; i + 1 < n; ++i) rate[i] = op.G(discrete_L(u, i, st), i);
        for (std::size_t i = 1; i + 1 < n; ++i) u[i] += sign * sub * rate[i];
        done += sub;
        // Dirichlet values move linearly from the old edges to the new ones.
        const double frac = done / total;
        Closure l = left, r = right;
        if (left.w1 == 0.0 && left.w2 == 0.0) l.g = old[0] + frac * (left.g - old[0]);
        if (right.w1 == 0.0 && right.w2 == 0.0) r.g = old[n - 1] + frac * (right.g - old[n - 1]);
        close_edges(u, l, r);
        for (double x : u) {
            if (!std::isfinite(x)) fail(ErrorKind::NonConvergence, "explicit fallback diverged");
        }
        if (++guard > 10000000) fail(ErrorKind::NonConvergence, "explicit fallback step budget exhausted");
    }
    return u;
}

std::vector<double> step_impl(const std::vector<double>& slice, double t_from, double t_to,
                              const GridSpec& grid, const ModelParams& params, const Boundary& bc,
                              const SolverOptions& opt, bool* used_fallback) {
    require_log_grid(grid);
    if (slice.size() != static_cast<std::size_t>(grid.nS)) {
        fail(ErrorKind::ParamError, "slice length does not match the grid");
    }
    const double dt = t_to - t_from;
    const double h = grid.dx();
    const Stencil st(h);
    const Operator op = make_operator(grid, params);
    const auto [left, right] = closures(grid, bc, opt.boundary);

    check_denominator(slice, slice, op, st, opt.den_tol, t_from);
    std::vector<double> u;
    if (!newton_step(slice, u, dt, op, st, left, right, opt)) {
        if (!opt.explicit_fallback) {
            fail(ErrorKind::NonConvergence, "Newton iteration did not converge at t=" +
                                                std::to_string(t_to));
        }
        u = explicit_steps(slice, dt, op, st, h, left, right);
        if (used_fallback) *used_fallback = true;
    }
    check_denominator(slice, u, op, st, opt.den_tol, t_to);
    return u;
}

}  // namespace

std::string to_string(Direction d) {
    switch (d) {
        case Direction::automatic: return "automatic";
        case Direction::backward: return "backward";
        case Direction::forward: return "forward";
    }
    return "unknown";
}

std::vector<double> diffusion_sign(const std::vector<double>& slice, const GridSpec& grid,
                                   const ModelParams& params) {
    require_log_grid(grid);
    const Stencil st(grid.dx());
    const Operator op = make_operator(grid, params);
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < slice.size(); ++i) {
        const double X = op.beta[i] * discrete_L(slice, i, st);
        const double D = 1.0 - X;
        out.push_back((1.0 + X) / (D * D * D));
    }
    return out;
}

Direction choose_direction(const std::vector<double>& slice, const GridSpec& grid,
                           const ModelParams& params) {
    const auto s = diffusion_sign(slice, grid, params);
    bool pos = false, neg = false;
    for (double v : s) {
        if (!std::isfinite(v)) fail(ErrorKind::IllPosed, "slice touches the denominator-zero manifold");
        // X = −1 carries no diffusion and suits either direction.
        if (v > 1e-10) pos = true;
        if (v < -1e-10) neg = true;
    }
    if (pos && neg) {
        fail(ErrorKind::IllPosed, "effective diffusion changes sign across the slice");
    }
    return neg ? Direction::forward : Direction::backward;
}

std::vector<double> step(const std::vector<double>& slice, double t_from, double t_to,
                         const GridSpec& grid, const ModelParams& params, const Boundary& bc,
                         const SolverOptions& options) {
    return step_impl(slice, t_from, t_to, grid, params, bc, options, nullptr);
}

std::vector<double> step_backward(const std::vector<double>& slice, double t, double dt,
                                  const GridSpec& grid, const ModelParams& params,
                                  const Boundary& bc, const SolverOptions& options) {
    return step(slice, t, t - dt, grid, params, bc, options);
}

Solution solve(const Data& data, const GridSpec& grid, const ModelParams& params,
               const SolverOptions& options) {
    require_log_grid(grid);
    auto slice_at = [&](double t) {
        std::vector<double> s(grid.nS);
        for (int i = 0; i < grid.nS; ++i) s[i] = data(grid.S(i), t);
        return s;
    };

    Direction dir = options.direction;
    if (dir == Direction::automatic) {
        dir = choose_direction(slice_at(grid.t_end), grid, params);
        if (dir == Direction::forward && choose_direction(slice_at(grid.t_start), grid, params) !=
                                             Direction::forward) {
            fail(ErrorKind::IllPosed, "no marching direction is well posed on both end slices");
        }
    }

    Solution sol{Field(grid), dir, 0};
    const bool backward = dir == Direction::backward;
    int n = backward ? grid.nT : 0;
    std::vector<double> u = slice_at(grid.t(n));
    for (int i = 0; i < grid.nS; ++i) sol.field.at(n, i) = u[i];

    for (int s = 0; s < grid.nT; ++s) {
        const int next = backward ? n - 1 : n + 1;
        const double t_next = grid.t(next);
        Boundary bc;
        if (options.boundary == BoundaryMode::dirichlet) {
            bc = {data(grid.S(0), t_next), data(grid.S(grid.nS - 1), t_next)};
        }
        bool fallback = false;
        u = step_impl(u, grid.t(n), t_next, grid, params, bc, options, &fallback);
        if (fallback) ++sol.fallback_steps;
        n = next;
        for (int i = 0; i < grid.nS; ++i) sol.field.at(n, i) = u[i];
    }
    return sol;
}

bool ConvergenceReport::monotone() const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!(rows[i].max_error < rows[i - 1].max_error)) return false;
    }
    return !rows.empty();
}

ConvergenceReport convergence_study(const closed_form::SolutionBranch& family,
                                    const ModelParams& params, const std::vector<GridSpec>& specs,
                                    const SolverOptions& options) {
    if (specs.empty()) fail(ErrorKind::ParamError, "convergence study needs at least one grid");
    const Data exact = [&family, &params](double S, double t) {
        return closed_form::u_family<double>(family, params, S, t);
    };
    SolverOptions opt = options;
    opt.boundary = BoundaryMode::dirichlet;

    ConvergenceReport report;
    for (const auto& spec : specs) {
        const Solution sol = solve(exact, spec, params, opt);
        report.direction = sol.direction;
        double err = 0.0;
        for (int n = 0; n <= spec.nT; ++n) {
            for (int i = 0; i < spec.nS; ++i) {
                err = std::max(err, std::fabs(sol.field.at(n, i) - exact(spec.S(i), spec.t(n))));
            }
        }
        report.rows.push_back({spec.nS, spec.nT, spec.dx(), spec.dt(), err});
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& r = report.rows[i];
        if (i > 0) {
            const auto& p = report.rows[i - 1];
            const bool ok = r.max_error > 0.0 && p.max_error > 0.0;
            report.orders.push_back(ok ? std::log(p.max_error / r.max_error) / std::log(p.dx / r.dx)
                                       : nan);
        }
        if (r.max_error > 0.0) {
            const double x = std::log(r.dx), y = std::log(r.max_error);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++count;
        }
    }
    report.fitted_order =
        count >= 2 ? (count * sxy - sx * sy) / (count * sxx - sx * sx) : nan;
    return report;
}

}  // namespace bsfb::pde
