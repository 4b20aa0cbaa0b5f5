#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bsfb::numerics {

/// Step control for Richardson-extrapolated central differences.
///
/// The base step is `rel_step * max(1, |x|)`, capped by `max_step` (callers
/// set the cap to a fraction of the distance to the nearest domain end so the
/// stencil never leaves the domain). Each level halves the step; `levels`
/// central differences are combined by a Romberg table.
struct FdOptions {
    long double rel_step = 1e-3L;
    int levels = 4;
    long double max_step = std::numeric_limits<long double>::infinity();
};

namespace detail {

template <class T, class F>
T romberg(F&& difference, T h, int levels) {
    levels = std::max(levels, 1);
    std::vector<T> table;
    table.reserve(static_cast<std::size_t>(levels));
    for (int i = 0; i < levels; ++i, h /= T(2)) table.push_back(difference(h));
    T factor = T(4);
    for (int j = 1; j < levels; ++j, factor *= T(4)) {
        for (int i = 0; i + j < levels; ++i) {
            const T lo = table[static_cast<std::size_t>(i)];
            const T hi = table[static_cast<std::size_t>(i + 1)];
            table[static_cast<std::size_t>(i)] = (factor * hi - lo) / (factor - T(1));
        }
    }
    return table[0];
}

template <class T>
T base_step(T x, const FdOptions& opt) {
    using std::fabs;
    const T a = fabs(x);
    const T scale = a > T(1) ? a : T(1);
    const T h = T(opt.rel_step) * scale;
    return std::isfinite(opt.max_step) && T(opt.max_step) < h ? T(opt.max_step) : h;
}

}  // namespace detail

/// First derivative of f at x, in the precision of x.
template <class F, class T>
T richardson_d1(F&& f, T x, const FdOptions& opt = {}) {
    return detail::romberg<T>([&](T h) { return T((f(x + h) - f(x - h)) / (T(2) * h)); },
                              detail::base_step(x, opt), opt.levels);
}

/// Second derivative of f at x, in the precision of x.
template <class F, class T>
T richardson_d2(F&& f, T x, const FdOptions& opt = {}) {
    const T fx = f(x);
    return detail::romberg<T>([&](T h) { return T((f(x + h) - T(2) * fx + f(x - h)) / (h * h)); },
                              detail::base_step(x, opt), opt.levels);
}

/// Solves a tridiagonal system in place (Thomas algorithm).
///
/// `lower[i]` multiplies x[i-1] in row i (lower[0] unused), `upper[i]`
/// multiplies x[i+1] (upper[n-1] unused). Returns false on a zero pivot.
bool solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs);

using State2 = std::array<double, 2>;
using Rhs2 = std::function<State2(double z, const State2& x)>;

/// A guard function whose zero set the integrator must not cross.
struct Guard {
    std::string tag;
    std::function<double(double z, const State2& x)> value;
    double tolerance = 0.0;  ///< stop when |value| < tolerance
};

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double initial_step = 1e-3;
    double min_step = 1e-13;
    double max_step = 0.1;
    std::size_t max_steps = 500000;
};

struct OdeResult {
    std::vector<double> z;
    std::vector<State2> x;
    std::optional<std::string> terminated_at;
};

/// Embedded Dormand–Prince 5(4) with guard-line stopping.
///
/// An Error thrown by `rhs` inside a trial step rejects the step and
/// shrinks it; if the step underflows `min_step` the run stops and is tagged
/// with the closest guard. A sign change of a guard across an accepted step
/// is located with toms748 on a cubic Hermite interpolant and the trajectory
/// is truncated there.
OdeResult integrate_dp45(const Rhs2& rhs, double z0, const State2& x0, double z1,
                         std::span<const Guard> guards, const OdeOptions& options = {});

}  // namespace bsfb::numerics
