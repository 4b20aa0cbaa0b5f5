#include "bsfb/numerics.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include "bsfb/error.hpp"

namespace bsfb::numerics {

bool solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return true;
    std::vector<double> c(n, 0.0);
    double beta = diag[0];
    if (beta == 0.0) return false;
    rhs[0] /= beta;
    for (std::size_t i = 1; i < n; ++i) {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i - 1];
        if (beta == 0.0) return false;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    return true;
}

namespace {

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

State2 axpy(const State2& x, double h, std::initializer_list<std::pair<double, const State2*>> terms) {
    State2 out = x;
    for (const auto& [coef, k] : terms) {
        out[0] += h * coef * (*k)[0];
        out[1] += h * coef * (*k)[1];
    }
    return out;
}

State2 hermite(double za, const State2& xa, const State2& fa, double zb, const State2& xb,
               const State2& fb, double z) {
    const double h = zb - za;
    const double s = (z - za) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    State2 out{};
    for (int i = 0; i < 2; ++i) {
        out[i] = h00 * xa[i] + h10 * h * fa[i] + h01 * xb[i] + h11 * h * fb[i];
    }
    return out;
}

const Guard* closest_guard(std::span<const Guard> guards, double z, const State2& x) {
    const Guard* best = nullptr;
    double best_value = std::numeric_limits<double>::infinity();
    for (const auto& g : guards) {
        const double v = std::fabs(g.value(z, x));
        if (v < best_value) {
            best_value = v;
            best = &g;
        }
    }
    return best;
}

}  // namespace

OdeResult integrate_dp45(const Rhs2& rhs, double z0, const State2& x0, double z1,
                         std::span<const Guard> guards, const OdeOptions& options) {
    OdeResult result;
    result.z.push_back(z0);
    result.x.push_back(x0);

    for (const auto& g : guards) {
        if (std::fabs(g.value(z0, x0)) < g.tolerance) {
            result.terminated_at = g.tag;
            return result;
        }
    }
    if (z1 == z0) return result;

    const double direction = z1 > z0 ? 1.0 : -1.0;
    double z = z0;
    State2 x = x0;
    State2 k1 = rhs(z, x);
    double h = direction * std::min(options.initial_step, std::fabs(z1 - z0));

    std::vector<double> guard_prev;
    guard_prev.reserve(guards.size());
    for (const auto& g : guards) guard_prev.push_back(g.value(z, x));

    std::size_t steps = 0;
    while (direction * (z1 - z) > 0.0) {
        if (++steps > options.max_steps) {
            fail(ErrorKind::NonConvergence, "integrate_dp45: step budget exhausted");
        }
        if (direction * (z + h - z1) > 0.0) h = z1 - z;

        State2 x_new{};
        State2 k7{};
        double err = 0.0;
        bool rhs_failed = false;
        try {
            const State2 k2 = rhs(z + c2 * h, axpy(x, h, {{a21, &k1}}));
            const State2 k3 = rhs(z + c3 * h, axpy(x, h, {{a31, &k1}, {a32, &k2}}));
            const State2 k4 = rhs(z + c4 * h, axpy(x, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
            const State2 k5 =
                rhs(z + c5 * h, axpy(x, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
            const State2 k6 = rhs(
                z + h, axpy(x, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
            x_new = axpy(x, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
            k7 = rhs(z + h, x_new);
            for (int i = 0; i < 2; ++i) {
                const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                      e6 * k6[i] + e7 * k7[i]);
                const double scale =
                    options.atol + options.rtol * std::max(std::fabs(x[i]), std::fabs(x_new[i]));
                err += (e / scale) * (e / scale);
            }
            err = std::sqrt(err / 2.0);
            if (!std::isfinite(err)) rhs_failed = true;
        } catch (const Error&) {
            rhs_failed = true;
        }

        if (rhs_failed || err > 1.0) {
            h *= rhs_failed ? 0.25 : std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (std::fabs(h) < options.min_step) {
                const Guard* g = closest_guard(guards, z, x);
                result.terminated_at = g ? g->tag : std::string("step_underflow");
                return result;
            }
            continue;
        }

        const double z_new = z + h;

        // Guard handling on the accepted step.
        std::optional<double> hit_z;
        const Guard* hit_guard = nullptr;
        for (std::size_t gi = 0; gi < guards.size(); ++gi) {
            const auto& g = guards[gi];
            const double g_new = g.value(z_new, x_new);
            if (std::fabs(g_new) < g.tolerance) {
                if (!hit_z || direction * (z_new - *hit_z) < 0.0) {
                    hit_z = z_new;
                    hit_guard = &g;
                }
                continue;
            }
            if ((g_new > 0.0) != (guard_prev[gi] > 0.0)) {
                auto along = [&](double s) {
                    return g.value(s, hermite(z, x, k1, z_new, x_new, k7, s));
                };
                boost::uintmax_t iters = 200;
                const auto [lo, hi] = boost::math::tools::toms748_solve(
                    along, z, z_new, guard_prev[gi], g_new,
                    boost::math::tools::eps_tolerance<double>(50), iters);
                const double root = 0.5 * (lo + hi);
                if (!hit_z || direction * (root - *hit_z) < 0.0) {
                    hit_z = root;
                    hit_guard = &g;
                }
            }
        }
        if (hit_z) {
            const State2 x_hit = *hit_z == z_new ? x_new
                                                 : hermite(z, x, k1, z_new, x_new, k7, *hit_z);
            if (direction * (*hit_z - z) > 0.0) {
                result.z.push_back(*hit_z);
                result.x.push_back(x_hit);
            }
            result.terminated_at = hit_guard->tag;
            return result;
        }

        z = z_new;
        x = x_new;
        k1 = k7;
        for (std::size_t gi = 0; gi < guards.size(); ++gi) guard_prev[gi] = guards[gi].value(z, x);
        result.z.push_back(z);
        result.x.push_back(x);

        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = direction * std::min(std::fabs(h) * factor, options.max_step);
    }
    return result;
}

}  // namespace bsfb::numerics
