#include "bsfb/symmetry.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>

#include "bsfb/error.hpp"

namespace bsfb::symmetry {

namespace {

bool is_integer_exponent(double k, double target) { return std::fabs(k - target) < 1e-12; }

template <class T>
struct PointT {
    T S, t, u;
};

template <class T>
PointT<T> act(const PointT<T>& p, const GroupElement& g, double k, bool special) {
    const T eps = g.epsilon;
    const T a1 = g.a1, a2 = g.a2, a3 = g.a3, a4 = g.a4;
    if (!special) {
        return {p.S, p.t + a2 * eps, p.u + a3 * p.S * eps + a4 * eps};
    }
    if (g.a1 == 0.0) {
        fail(ErrorKind::ParamError,
             "special-lambda action needs a1 != 0; use the general group for a1 = 0");
    }
    using std::exp;
    using std::expm1;
    const T grow = exp(a1 * eps);
    PointT<T> out{p.S * grow, p.t + a2 * eps, T(0)};
    if (is_integer_exponent(k, 1.0)) {
        out.u = p.u + a3 / a1 * p.S * expm1(a1 * eps) + a4 * eps;
    } else if (is_integer_exponent(k, 0.0)) {
        out.u = p.u * grow + a3 * p.S * eps * grow + a4 / a1 * expm1(a1 * eps);
    } else {
        // Flow of dũ/dε = (1−k) a1 ũ + a3 S̃ + a4 with S̃ = S e^{a1 ε}.
        const T kk = k;
        out.u = p.u * exp(a1 * (1 - kk) * eps) -
                a3 / (a1 * kk) * p.S * grow * expm1(-a1 * kk * eps) +
                a4 / (a1 * (1 - kk)) * expm1(a1 * (1 - kk) * eps);
    }
    return out;
}

}  // namespace

VectorField combine(const std::vector<VectorField>& fields, const std::vector<double>& coeffs,
                    std::string name) {
    if (fields.size() != coeffs.size()) {
        fail(ErrorKind::ParamError, "combine: fields and coefficients differ in length");
    }
    auto sum = [fields, coeffs](auto member) {
        return [fields, coeffs, member](const Point& p) {
            double acc = 0.0;
            for (std::size_t i = 0; i < fields.size(); ++i) acc += coeffs[i] * (fields[i].*member)(p);
            return acc;
        };
    };
    return {std::move(name), sum(&VectorField::xi), sum(&VectorField::tau),
            sum(&VectorField::phi)};
}

std::vector<VectorField> generators(double k, bool special) {
    auto zero = [](const Point&) { return 0.0; };
    auto one = [](const Point&) { return 1.0; };
    std::vector<VectorField> out{
        {"V1", zero, one, zero},
        {"V2", zero, zero, [](const Point& p) { return p.S; }},
        {"V3", zero, zero, one},
    };
    if (special) {
        out.push_back({"V4", [](const Point& p) { return p.S; }, zero,
                       [k](const Point& p) { return (1.0 - k) * p.u; }});
    }
    return out;
}

VectorField lie_bracket(const VectorField& V, const VectorField& W, double h) {
    // Derivative of f along the field X at p.
    auto along = [h](const VectorField& X, const Coefficient& f, const Point& p) {
        const Point d = X.at(p);
        const double scale = std::max({1.0, std::fabs(p.S), std::fabs(p.t), std::fabs(p.u)});
        const double norm = std::max({1.0, std::fabs(d.S), std::fabs(d.t), std::fabs(d.u)});
        const double step = h * scale / norm;
        const Point fwd{p.S + step * d.S, p.t + step * d.t, p.u + step * d.u};
        const Point bwd{p.S - step * d.S, p.t - step * d.t, p.u - step * d.u};
        return (f(fwd) - f(bwd)) / (2.0 * step);
    };
    auto component = [V, W, along](Coefficient VectorField::*member) {
        return [V, W, along, member](const Point& p) {
            return along(V, W.*member, p) - along(W, V.*member, p);
        };
    };
    return {"[" + V.name + "," + W.name + "]", component(&VectorField::xi),
            component(&VectorField::tau), component(&VectorField::phi)};
}

Point group_action(const Point& p, const GroupElement& g, double k, bool special) {
    const auto out = act<double>({p.S, p.t, p.u}, g, k, special);
    return {out.S, out.t, out.u};
}

Invariants invariants(const Point& p, double k, double a) {
    if (!(p.S > 0.0)) fail(ErrorKind::DomainError, "invariants require S > 0");
    if (a == 0.0) fail(ErrorKind::ParamError, "invariants require a != 0");
    return {std::log(p.S) + a * p.t, p.u * std::pow(p.S, k - 1.0)};
}

double orbit_invariant_speed(const GroupElement& g) {
    if (g.a2 == 0.0) fail(ErrorKind::ParamError, "orbit invariant speed requires a2 != 0");
    return -g.a1 / g.a2;
}

Surface transport(const Surface& u, const GroupElement& g, double k, bool special) {
    if (special && g.a1 == 0.0) {
        fail(ErrorKind::ParamError, "special-lambda transport needs a1 != 0");
    }
    return [u, g, k, special](long double S_img, long double t_img) {
        const long double S = special ? S_img * std::exp(-static_cast<long double>(g.a1) * g.epsilon)
                                      : S_img;
        const long double t = t_img - static_cast<long double>(g.a2) * g.epsilon;
        return act<long double>({S, t, u(S, t)}, g, k, special).u;
    };
}

Field transport_grid(const Field& source, const GroupElement& g, double k, bool special,
                     const GridSpec& target) {
    source.spec.validate();
    target.validate();
    const GridSpec& src = source.spec;
    if (target.nT != src.nT || std::fabs(target.t_start - (src.t_start + g.a2 * g.epsilon)) > 1e-12 ||
        std::fabs(target.t_end - (src.t_end + g.a2 * g.epsilon)) > 1e-12) {
        fail(ErrorKind::ParamError, "transport_grid: target time grid must be the shifted source grid");
    }
    const double scale = special ? std::exp(g.a1 * g.epsilon) : 1.0;
    const double lo = src.S_min * scale;
    const double hi = src.S_max * scale;
    if (target.S_min < lo * (1 - 1e-12) || target.S_max > hi * (1 + 1e-12)) {
        fail(ErrorKind::DomainError, "transport_grid: target S range exceeds the image range");
    }

    Field out(target);
    std::vector<double> row(static_cast<std::size_t>(src.nS));
    for (int n = 0; n <= src.nT; ++n) {
        for (int i = 0; i < src.nS; ++i) {
            const auto img = act<double>({src.S(i), src.t(n), source.at(n, i)}, g, k, special);
            row[static_cast<std::size_t>(i)] = img.u;
        }
        // Image nodes stay uniform: log S shifts by a1 ε, or S scales by e^{a1 ε}.
        const double left = src.log_space ? std::log(lo) : lo;
        const double step = src.log_space ? src.dx() : src.dx() * scale;
        boost::math::interpolators::cardinal_cubic_b_spline<double> spline(row.data(), row.size(),
                                                                            left, step);
        for (int i = 0; i < target.nS; ++i) {
            const double S = target.S(i);
            const double x = src.log_space ? std::log(S) : S;
            out.at(n, i) = spline(std::clamp(x, left, left + step * (src.nS - 1)));
        }
    }
    return out;
}

}  // namespace bsfb::symmetry
