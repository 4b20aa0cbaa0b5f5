#include "bsfb/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/constants/constants.hpp>

#include "bsfb/error.hpp"
#include "quad.hpp"

namespace bsfb::closed_form {

namespace {

constexpr double kEndSlack = 1e-12;

bool is_q4(double q) { return std::fabs(q - 4.0) < 1e-14; }

bool negative_c_family(Family f) {
    return f == Family::trig1 || f == Family::trig2 || f == Family::three_piece;
}

// m = |c| e^{3z/2}/2; the trigonometric forms live on m ∈ [0, 2].
template <class T>
T half_scale(T z, double abs_c) {
    using std::exp;
    return static_cast<T>(abs_c) * exp(T(1.5) * z) / T(2);
}

// θ = acos(1 − m) = 2 asin(√(m/2)), accurate at both ends.
template <class T>
T trig_angle(T z, double abs_c) {
    using std::asin;
    using std::sqrt;
    T m = half_scale(z, abs_c);
    if (m > T(2)) {
        if (m > T(2) * (T(1) + T(kEndSlack))) {
            fail(ErrorKind::DomainEnd, "z = " + std::to_string(static_cast<double>(z)) +
                                           " lies beyond z* = " +
                                           std::to_string(domain_end(abs_c)));
        }
        m = T(2);
    }
    return T(2) * asin(sqrt(m / T(2)));
}

// ψ = acosh(−1 + m) for m ≥ 2.
template <class T>
T hyperbolic_angle(T z, double abs_c) {
    using std::log1p;
    using std::sqrt;
    T e = half_scale(z, abs_c) - T(2);
    if (e < T(0)) {
        if (e < -T(2) * T(kEndSlack)) {
            fail(ErrorKind::DomainEnd, "z = " + std::to_string(static_cast<double>(z)) +
                                           " lies below z* = " +
                                           std::to_string(domain_end(abs_c)));
        }
        e = T(0);
    }
    return log1p(e + sqrt(e * (e + T(2))));
}

void check_abs_c(double abs_c) {
    if (!(abs_c > 0.0)) fail(ErrorKind::ParamError, "|c| must be positive");
}

void check_b(double b) {
    if (b == 0.0 || !std::isfinite(b)) fail(ErrorKind::ParamError, "b must be finite and nonzero");
}

}  // namespace

std::string to_string(Family f) {
    switch (f) {
        case Family::constant: return "constant";
        case Family::line_minus3: return "line_minus3";
        case Family::line_exceptional: return "line_exceptional";
        case Family::const_slope_general_q: return "const_slope_general_q";
        case Family::euler_plus: return "euler_plus";
        case Family::trig1: return "trig1";
        case Family::trig2: return "trig2";
        case Family::three_piece: return "three_piece";
        case Family::degenerate_u0: return "degenerate_u0";
    }
    return "unknown";
}

std::optional<Family> family_from_string(std::string_view name) {
    for (auto f : {Family::constant, Family::line_minus3, Family::line_exceptional,
                   Family::const_slope_general_q, Family::euler_plus, Family::trig1, Family::trig2,
                   Family::three_piece, Family::degenerate_u0}) {
        if (to_string(f) == name) return f;
    }
    return std::nullopt;
}

bool SolutionBranch::needs_q4() const {
    return family == Family::line_minus3 || family == Family::line_exceptional ||
           family == Family::euler_plus || negative_c_family(family);
}

void SolutionBranch::validate() const {
    if (family != Family::constant && family != Family::degenerate_u0) check_b(b);
    if (needs_q4() && !is_q4(q)) {
        fail(ErrorKind::ParamError, to_string(family) + " is an exact solution only for q = 4");
    }
    if (family == Family::euler_plus && !(c > 0.0)) {
        fail(ErrorKind::ParamError, "euler_plus requires c > 0");
    }
    if (negative_c_family(family) && !(c < 0.0)) {
        fail(ErrorKind::ParamError, to_string(family) + " requires c < 0");
    }
    if (family == Family::const_slope_general_q) {
        if (q < 0.0) fail(ErrorKind::RegimeError, "constant slopes are complex for q < 0");
        if (root_sign != 1 && root_sign != -1) fail(ErrorKind::ParamError, "root_sign must be +-1");
    }
}

double cubic_defect(double p, double z, double c, CubicForm which) {
    const double rhs = c * std::exp(1.5 * z);
    return which == CubicForm::cubm ? (p - 1.0) * (p - 1.0) * (p + 2.0) - rhs
                                    : (p + 1.0) * (p + 1.0) * (p - 2.0) - rhs;
}

std::vector<double> cubic_roots_p(double z, double c, CubicForm which) {
    if (which == CubicForm::cubm) {
        // (p−1)²(p+2) = −(−p+1)²(−p−2): negate the cubp roots for −c.
        auto roots = cubic_roots_p(z, -c, CubicForm::cubp);
        for (auto& r : roots) r = -r;
        std::sort(roots.begin(), roots.end());
        return roots;
    }
    // p³ − 3p − (2 + R) = 0 with p = 2 cos α, cos 3α = s = 1 + R/2.
    const long double R = static_cast<long double>(c) * std::exp(1.5L * z);
    const long double s = 1.0L + R / 2.0L;
    const long double pi = std::numbers::pi_v<long double>;
    std::vector<long double> roots;
    if (R <= 0.0L && R >= -4.0L) {
        const long double angle = s >= 0.0L ? 2.0L * std::asin(std::sqrt(-R / 4.0L))
                                            : pi - 2.0L * std::asin(std::sqrt((4.0L + R) / 4.0L));
        for (int j = 0; j < 3; ++j) roots.push_back(2.0L * std::cos((angle - 2.0L * pi * j) / 3.0L));
    } else {
        const long double sign = s > 0.0L ? 1.0L : -1.0L;
        roots.push_back(2.0L * sign * std::cosh(std::acosh(std::fabs(s)) / 3.0L));
    }
    std::vector<double> out;
    for (long double p : roots) {
        for (int it = 0; it < 3; ++it) {
            const long double f = p * p * p - 3.0L * p - 2.0L - R;
            const long double df = 3.0L * p * p - 3.0L;
            if (std::fabs(df) < 1e-6L) break;
            p -= f / df;
        }
        out.push_back(static_cast<double>(p));
    }
    std::sort(out.begin(), out.end());
    return out;
}

double domain_end(double abs_c) {
    check_abs_c(abs_c);
    return (2.0 / 3.0) * std::log(4.0 / abs_c);
}

template <class T>
T v_plus(T z, double c, double b, double d) {
    using std::asinh;
    using std::cosh;
    using std::exp;
    using std::log;
    using std::sinh;
    using std::sqrt;
    if (!(c > 0.0)) fail(ErrorKind::ParamError, "v_plus requires c > 0");
    check_b(b);
    // cosh η = 1 + c e^{3z/2}/2; the Euler variable is τ = 2e^η.
    const T eta = T(2) * asinh(sqrt(static_cast<T>(c) * exp(T(1.5) * z)) / T(2));
    const T bb = b;
    return -T(2) / bb * cosh(T(2) * eta / T(3)) - T(4) / bb * log(T(2) * sinh(eta / T(6))) +
           static_cast<T>(d);
}

template <class T>
T vz_plus(T z, double c, double b) {
    using std::asinh;
    using std::cosh;
    using std::exp;
    using std::sqrt;
    if (!(c > 0.0)) fail(ErrorKind::ParamError, "vz_plus requires c > 0");
    check_b(b);
    const T eta = T(2) * asinh(sqrt(static_cast<T>(c) * exp(T(1.5) * z)) / T(2));
    const T bb = b;
    return -T(1) / bb - T(2) / bb * cosh(T(2) * eta / T(3));
}

template <class T>
T v1(T z, double abs_c, double b, double d) {
    using std::cos;
    using std::log;
    using std::sin;
    check_abs_c(abs_c);
    check_b(b);
    const T th = trig_angle(z, abs_c);
    const T bb = b;
    return z / bb - T(2) / bb * cos(T(2) * th / T(3)) -
           T(4) / (T(3) * bb) * log(T(1) + T(2) * cos(th / T(3))) -
           T(16) / (T(3) * bb) * log(sin(th / T(6))) + static_cast<T>(d);
}

template <class T>
T v2(T z, double abs_c, double b, double d) {
    using std::cos;
    using std::log;
    using std::sin;
    using std::sqrt;
    check_abs_c(abs_c);
    check_b(b);
    // Written in θ = acos(1 − m) = π − acos(−1 + m).
    const T th = trig_angle(z, abs_c);
    const T pi = boost::math::constants::pi<T>();
    const T s6 = sin(th / T(6));
    const T inner = T(2) * s6 * s6 + sqrt(T(3)) * sin(th / T(3));
    const T bb = b;
    return z / bb - T(2) / bb * cos(T(4) * pi / T(3) - T(2) * th / T(3)) -
           T(4) / (T(3) * bb) * log(inner) - T(16) / (T(3) * bb) * log(sin(pi / T(3) - th / T(6))) +
           static_cast<T>(d);
}

template <class T>
T v31(T z, double abs_c, double b, double d) {
    using std::cos;
    using std::log;
    using std::sin;
    using std::sqrt;
    check_abs_c(abs_c);
    check_b(b);
    const T th = trig_angle(z, abs_c);
    const T pi = boost::math::constants::pi<T>();
    const T s6 = sin(th / T(6));
    const T inner = -T(2) * s6 * s6 + sqrt(T(3)) * sin(th / T(3));
    const T bb = b;
    return z / bb - T(2) / bb * cos(T(2) * pi / T(3) - T(2) * th / T(3)) -
           T(4) / (T(3) * bb) * log(inner) - T(16) / (T(3) * bb) * log(cos(pi / T(6) - th / T(6))) +
           static_cast<T>(d);
}

template <class T>
T v32(T z, double abs_c, double b, double d) {
    using std::cosh;
    using std::log;
    check_abs_c(abs_c);
    check_b(b);
    const T psi = hyperbolic_angle(z, abs_c);
    const T bb = b;
    return z / bb - T(2) / bb * cosh(T(2) * psi / T(3)) -
           T(16) / (T(3) * bb) * log(cosh(psi / T(6))) -
           T(4) / (T(3) * bb) * log(T(-1) + T(2) * cosh(psi / T(3))) + static_cast<T>(d);
}

template <class T>
T v3(T z, double abs_c, double b, double d) {
    check_abs_c(abs_c);
    return half_scale(z, abs_c) <= T(2) ? v31(z, abs_c, b, d) : v32(z, abs_c, b, d);
}

template <class T>
T evaluate_v(const SolutionBranch& br, T z) {
    br.validate();
    switch (br.family) {
        case Family::constant:
        case Family::line_minus3:
        case Family::line_exceptional:
        case Family::const_slope_general_q:
            return static_cast<T>(linear_slope(br)) * z + static_cast<T>(br.d);
        case Family::euler_plus: return v_plus(z, br.c, br.b, br.d);
        case Family::trig1: return v1(z, -br.c, br.b, br.d);
        case Family::trig2: return v2(z, -br.c, br.b, br.d);
        case Family::three_piece: return v3(z, -br.c, br.b, br.d);
        case Family::degenerate_u0: break;
    }
    fail(ErrorKind::ParamError, "degenerate_u0 has no invariant form v(z); use u_family");
}

double evaluate_vz(const SolutionBranch& br, double z) {
    br.validate();
    const double pi = std::numbers::pi;
    switch (br.family) {
        case Family::constant:
        case Family::line_minus3:
        case Family::line_exceptional:
        case Family::const_slope_general_q: return linear_slope(br);
        case Family::euler_plus: return vz_plus(z, br.c, br.b);
        case Family::trig1:
        case Family::trig2: {
            const double th = trig_angle(z, -br.c);
            const double shift = br.family == Family::trig1 ? 0.0 : 2.0 * pi / 3.0;
            return (-1.0 - 2.0 * std::cos(2.0 * th / 3.0 + shift)) / br.b;
        }
        case Family::three_piece: {
            if (half_scale(z, -br.c) <= 2.0) {
                const double th = trig_angle(z, -br.c);
                return (-1.0 - 2.0 * std::cos(2.0 * th / 3.0 + 4.0 * pi / 3.0)) / br.b;
            }
            return (-1.0 - 2.0 * std::cosh(2.0 * hyperbolic_angle(z, -br.c) / 3.0)) / br.b;
        }
        case Family::degenerate_u0: break;
    }
    fail(ErrorKind::ParamError, "degenerate_u0 has no invariant form v(z); use u_family");
}

bool in_domain(const SolutionBranch& br, double z) {
    if (br.family == Family::trig1 || br.family == Family::trig2) {
        return half_scale(z, -br.c) <= 2.0 * (1.0 + kEndSlack);
    }
    return std::isfinite(z);
}

double distance_to_singularity(const SolutionBranch& br, double z) {
    if (negative_c_family(br.family)) return std::fabs(z - domain_end(-br.c));
    return std::numeric_limits<double>::infinity();
}

std::vector<SolutionBranch> linear_families(double q, double b, double d) {
    if (q < 0.0) fail(ErrorKind::RegimeError, "constant slopes are complex for q < 0");
    check_b(b);
    std::vector<SolutionBranch> out;
    SolutionBranch base;
    base.b = b;
    base.q = q;
    base.d = d;
    base.c = 0.0;
    base.family = Family::constant;
    out.push_back(base);
    if (is_q4(q)) {
        base.family = Family::line_minus3;
        out.push_back(base);
        base.family = Family::line_exceptional;
        out.push_back(base);
    } else {
        base.family = Family::const_slope_general_q;
        base.root_sign = -1;
        out.push_back(base);
        base.root_sign = 1;
        out.push_back(base);
    }
    return out;
}

double linear_slope(const SolutionBranch& br) {
    switch (br.family) {
        case Family::constant: return 0.0;
        case Family::line_minus3: return -3.0 / br.b;
        case Family::line_exceptional: return 1.0 / br.b;
        case Family::const_slope_general_q:
            return (-1.0 + br.root_sign * std::sqrt(br.q)) / br.b;
        default: break;
    }
    fail(ErrorKind::ParamError, to_string(br.family) + " is not a linear family");
}

double linear_mode_solution(double z, double d1, double d2) { return d1 + d2 * std::exp(0.75 * z); }

double invariant_speed(const SolutionBranch& br, const ModelParams& params) {
    if (br.q == 0.0) fail(ErrorKind::RegimeError, "q = 0 has no finite invariant speed");
    return params.sigma() * params.sigma() / (2.0 * br.q);
}

template <class T>
T u_family(const SolutionBranch& br, const ModelParams& params, T S, T t) {
    using std::log;
    if (!(S > T(0))) fail(ErrorKind::DomainError, "u families require S > 0");
    if (br.family == Family::degenerate_u0) {
        return static_cast<T>(u0_family(static_cast<double>(S), static_cast<double>(t), br.c1,
                                        br.c2, params));
    }
    if (std::fabs(params.k() - 1.0) > 1e-12) {
        fail(ErrorKind::ParamError, "invariant u families are built for k = 1");
    }
    if (params.linear_mode() && br.family != Family::constant) {
        fail(ErrorKind::LinearModeError, to_string(br.family) + " requires rho*omega != 0");
    }
    SolutionBranch local = br;
    if (!params.linear_mode()) local.b = params.b();
    const T z = log(S) + static_cast<T>(invariant_speed(local, params)) * t;
    if (!in_domain(local, static_cast<double>(z))) {
        fail(ErrorKind::DomainError, "(S, t) lies outside the domain of " + to_string(br.family));
    }
    return evaluate_v(local, z);
}

Surface surface(const SolutionBranch& br, const ModelParams& params) {
    br.validate();
    return [br, params](long double S, long double t) { return u_family(br, params, S, t); };
}

#define BSFB_INSTANTIATE(T)                                                   \
    template T v_plus<T>(T, double, double, double);                          \
    template T vz_plus<T>(T, double, double);                                 \
    template T v1<T>(T, double, double, double);                              \
    template T v2<T>(T, double, double, double);                              \
    template T v31<T>(T, double, double, double);                             \
    template T v32<T>(T, double, double, double);                             \
    template T v3<T>(T, double, double, double);                              \
    template T evaluate_v<T>(const SolutionBranch&, T);                       \
    template T u_family<T>(const SolutionBranch&, const ModelParams&, T, T);

BSFB_INSTANTIATE(double)
BSFB_INSTANTIATE(long double)
BSFB_INSTANTIATE(detail::quad)

#undef BSFB_INSTANTIATE

}  // namespace bsfb::closed_form
