#include "bsfb/reduction.hpp"

#include <algorithm>
#include <cmath>

#include "bsfb/error.hpp"

namespace bsfb::reduction {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

bool is_one(double k) { return std::fabs(k - 1.0) < 1e-12; }

// Radicand of the branch radical, (q/b³)(q/(4b) − y) written as q(q − 4by)/(4b⁴).
double radicand(double y, double q, double b) { return q * (q - 4.0 * b * y) / (4.0 * b * b * b * b); }

double checked_root(double y, const ReducedParams& p) {
    const double q = p.q();
    const double b = p.b();
    double r = radicand(y, q, b);
    if (r < 0.0) {
        // Rounding right on the discriminant line.
        const double slack = 1e-14 * std::max(1.0, q * q / (4.0 * b * b * b * b));
        if (r < -slack) {
            fail(ErrorKind::BeyondDiscriminant,
                 "branch radical is negative at y=" + std::to_string(y));
        }
        r = 0.0;
    }
    return std::sqrt(r);
}

double log_abs(double x, const char* what) {
    if (x == 0.0) fail(ErrorKind::LogDomain, std::string("logarithm argument vanishes: ") + what);
    return std::log(std::fabs(x));
}

double denominator_checked(double N, double b, double den_tol) {
    const double D = 1.0 - b * N;
    if (std::fabs(D) < den_tol * std::max(1.0, std::fabs(b * N))) {
        fail(ErrorKind::DegenerateDenominator, "1 - bN = " + std::to_string(D));
    }
    return D;
}

}  // namespace

ReducedParams::ReducedParams(double a, double b, double k, double sigma)
    : a_(a), b_(b), k_(k), sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorKind::DomainError, "sigma must be positive");
    if (a == 0.0 || !std::isfinite(a)) fail(ErrorKind::ParamError, "a must be finite and nonzero");
    if (b == 0.0 || !std::isfinite(b)) fail(ErrorKind::ParamError, "b must be finite and nonzero");
    if (!std::isfinite(k)) fail(ErrorKind::ParamError, "k must be finite");
}

ReducedParams ReducedParams::from_q(double q, double b, double k) {
    if (q == 0.0) fail(ErrorKind::RegimeError, "q = 0 has no finite invariant speed");
    return ReducedParams(1.0 / (2.0 * q), b, k, 1.0);
}

BranchId BranchId::make(Sign sign, double q) { return {sign, sheet_for(sign, q)}; }

BranchId BranchId::involuted(double q) const {
    return make(sign == Sign::plus ? Sign::minus : Sign::plus, q);
}

Sheet sheet_for(Sign sign, double q) {
    const double s = sign == Sign::plus ? 1.0 : -1.0;
    return s == -sgn(q) ? Sheet::principal : Sheet::second;
}

std::string to_string(Sign sign) { return sign == Sign::plus ? "plus" : "minus"; }
std::string to_string(Sheet sheet) { return sheet == Sheet::principal ? "principal" : "second"; }

std::string to_string(GuardLine g) {
    switch (g) {
        case GuardLine::y_zero: return "y_zero";
        case GuardLine::discriminant: return "discriminant";
        case GuardLine::infinity: return "infinity";
        case GuardLine::step_underflow: return "step_underflow";
    }
    return "unknown";
}

double reduced_ode_residual(double v, double v_z, double v_zz, const ReducedParams& p,
                            double den_tol) {
    const double k = p.k();
    const double N = v_zz + (1.0 - 2.0 * k) * v_z - k * (1.0 - k) * v;
    const double D = denominator_checked(N, p.b(), den_tol);
    return p.a() * v_z + 0.5 * p.sigma() * p.sigma() * N / (D * D);
}

double autonomous_residual(double v_z, double v_zz, double q, double b, double den_tol) {
    const double N = v_zz - v_z;
    if (b == 0.0) return v_z + q * N;
    const double D = denominator_checked(N, b, den_tol);
    return v_z + q * N / (D * D);
}

double quadratic_form(double y, double y_z, double q, double b) {
    const double B = y * y + y / b - q / (2.0 * b * b);
    const double C = y * y + 2.0 * y / b + (1.0 - q) / (b * b);
    return y * y_z * y_z - 2.0 * B * y_z + C * y;
}

double quadratic_form_dyz(double y, double y_z, double q, double b) {
    return 2.0 * y * y_z - 2.0 * (y * y + y / b - q / (2.0 * b * b));
}

double ExceptionalProbe::residual() const { return std::max(std::fabs(F), std::fabs(dF_dyz)); }

ExceptionalProbe exceptional_probe(double q, double b) {
    if (b == 0.0) fail(ErrorKind::ParamError, "exceptional probe needs b != 0");
    const double y = q / (4.0 * b);
    return {y, quadratic_form(y, 0.0, q, b), quadratic_form_dyz(y, 0.0, q, b)};
}

std::vector<double> constant_slopes(double q, double b) {
    if (q < 0.0) fail(ErrorKind::RegimeError, "constant slopes are complex for q < 0");
    if (b == 0.0) fail(ErrorKind::ParamError, "constant slopes need b != 0");
    const double r = std::sqrt(q);
    std::vector<double> out{(-1.0 - r) / b, (-1.0 + r) / b};
    std::sort(out.begin(), out.end());
    return out;
}

double branch_rhs_v(double x, double v, const BranchId& branch, const ReducedParams& p) {
    if (x == 0.0) fail(ErrorKind::SingularLine, "branch equation is singular on y = 0");
    const double q = p.q();
    const double b = p.b();
    const double k = p.k();
    const double root = checked_root(x, p);
    // √(q(q − 4bx))/(2b²x²) = √radicand / x².
    return -1.0 + 2.0 * k + 1.0 / (b * x) - q / (2.0 * b * b * x * x) + k * (1.0 - k) * v / x +
           branch.sign_value() * root / (x * x);
}

double branch_rhs(double y, double v, const BranchId& branch, const ReducedParams& p) {
    if (y == 0.0) fail(ErrorKind::SingularLine, "branch equation is singular on y = 0");
    if (is_one(p.k())) {
        const double q = p.q();
        const double b = p.b();
        const double root = checked_root(y, p);
        return (y * y + y / b - q / (2.0 * b * b) + branch.sign_value() * root) / y;
    }
    return y * branch_rhs_v(y, v, branch, p);
}

std::complex<double> curve_F(std::complex<double> zeta, std::complex<double> w, double q,
                             double b) {
    const auto B = zeta * zeta + zeta / b - q / (2.0 * b * b);
    const auto C = zeta * zeta + 2.0 * zeta / b + (1.0 - q) / (b * b);
    return zeta * w * w - 2.0 * B * w + C * zeta;
}

std::complex<double> curve_eval(std::complex<double> zeta, Sheet sheet, const ReducedParams& p,
                                double bp_tol) {
    const double q = p.q();
    const double b = p.b();
    const double zeta2 = q / (4.0 * b);
    if (std::abs(zeta - zeta2) < bp_tol * std::max(1.0, std::fabs(zeta2))) {
        fail(ErrorKind::BranchPointProximity, "too close to the branch point q/(4b)");
    }
    const auto B = zeta * zeta + zeta / b - q / (2.0 * b * b);
    const auto C = zeta * zeta + 2.0 * zeta / b + (1.0 - q) / (b * b);
    const auto D = std::complex<double>(q / (b * b * b)) * (zeta2 - zeta);
    // Principal root (B + s√D)/ζ with s = −sgn(q); the other root follows
    // from w₁w₂ = C without cancellation near ζ = 0.
    const auto numer = B - sgn(q) * std::sqrt(D);
    if (sheet == Sheet::principal) {
        if (zeta == 0.0) fail(ErrorKind::PoleAt, "principal sheet has a pole at zeta = 0");
        return numer / zeta;
    }
    if (zeta == 0.0) return 0.0;
    return C * zeta / numer;
}

double LeadingTerm::operator()(double zeta) const { return coefficient * std::pow(zeta, power); }

LeadingTerm leading_term_at_zero(Sheet sheet, double q, double b) {
    if (sheet == Sheet::principal) return {-q / (b * b), -1};
    if (q == 0.0) fail(ErrorKind::RegimeError, "second-sheet expansion needs q != 0");
    if (std::fabs(q - 1.0) < 1e-14) return {-2.0 * b, 2};
    return {(q - 1.0) / q, 1};
}

double value_at_discriminant(double q, double b) { return (q - 4.0) / (4.0 * b); }

std::vector<double> finite_branch_points(double q, double b) { return {0.0, q / (4.0 * b)}; }

CurvePoint uniformize(double p_param, const ReducedParams& p) {
    const double q = p.q();
    const double b = p.b();
    if (p_param == -1.0) fail(ErrorKind::PoleAt, "uniformization has a pole at p = -1");
    const double zeta = q * (1.0 - p_param * p_param) / (4.0 * b);
    const double w = (1.0 - p_param) * (q * (1.0 + p_param) * (1.0 + p_param) - 4.0) /
                     (4.0 * b * (p_param + 1.0));
    return {zeta, w};
}

double p_from_vz(double v_z, const ReducedParams& p) {
    double r = 1.0 - 4.0 * p.b() * v_z / p.q();
    if (r < 0.0) {
        if (r < -1e-14) fail(ErrorKind::DomainError, "1 - (4b/q) v_z is negative");
        r = 0.0;
    }
    return std::sqrt(r);
}

double chart_parameter(double v_z, const ReducedParams& p) {
    return -sgn(p.q()) * p_from_vz(v_z, p);
}

double implicit_relation_slope(double q) {
    if (q == 0.0) fail(ErrorKind::RegimeError, "implicit relations need q != 0");
    if (std::fabs(q - 1.0) < 1e-14) return 1.0;
    return q > 0.0 ? 2.0 * (q - 1.0) : 2.0 * (1.0 - q);
}

double implicit_relation(double p_param, double q, Sign sign) {
    if (q == 0.0) fail(ErrorKind::RegimeError, "implicit relations need q != 0");
    // The plus relation is the minus one at −p.
    const double s = sign == Sign::plus ? -1.0 : 1.0;
    const double x = s * p_param;
    // a·log|arg|, skipped when the coefficient vanishes (q = 4 drops a factor).
    auto term = [](double a, double arg, const char* what) {
        return a == 0.0 ? 0.0 : a * log_abs(arg, what);
    };

    if (std::fabs(q - 1.0) < 1e-14) {
        const double pole = 1.0 - x;
        if (pole == 0.0) fail(ErrorKind::LogDomain, "q = 1 relation is singular at |p| = 1");
        return 1.0 / pole + term(0.75, x + 3.0, "p+3") + term(1.25, x - 1.0, "p-1");
    }
    if (q > 0.0) {
        const double r = std::sqrt(q);
        return term(2.0 * q, x - 1.0, "p-1") +
               term(q - r - 2.0, (x + 1.0) * r - 2.0, "(p+1)sqrt(q)-2") +
               term(q + r - 2.0, (x + 1.0) * r + 2.0, "(p+1)sqrt(q)+2");
    }
    const double r = std::sqrt(-q);
    return 2.0 * r * std::atan((x + 1.0) * r / 2.0) + term(-2.0 * q, x - 1.0, "p-1") +
           term(2.0 - q, 4.0 - q * (x + 1.0) * (x + 1.0), "4-q(p+1)^2");
}

Trajectory integrate_branch(double y0, double z0, double z1, const BranchId& branch,
                            const ReducedParams& p, const IntegrateOptions& options) {
    const double tol = options.guard_rel_tol * std::max(1.0, std::fabs(p.discriminant_line()));
    const double line = p.discriminant_line();
    if (std::fabs(y0) < tol) fail(ErrorKind::ImmediateSingular, "y0 lies on the line y = 0");
    if (std::fabs(y0 - line) < tol) {
        fail(ErrorKind::ImmediateSingular, "y0 lies on the discriminant line q/(4b)");
    }

    const numerics::Guard guards[] = {
        {to_string(GuardLine::y_zero), [](double, const numerics::State2& x) { return x[0]; }, tol},
        {to_string(GuardLine::discriminant),
         [line](double, const numerics::State2& x) { return x[0] - line; }, tol},
        {to_string(GuardLine::infinity),
         [ymax = options.y_max](double, const numerics::State2& x) {
             return std::fabs(x[0]) - ymax;
         },
         0.0},
    };
    auto rhs = [&](double, const numerics::State2& x) -> numerics::State2 {
        return {branch_rhs(x[0], x[1], branch, p), x[0]};
    };
    const auto run = numerics::integrate_dp45(rhs, z0, {y0, options.v0}, z1, guards, options.ode);

    Trajectory tr;
    tr.zs = run.z;
    tr.ys.reserve(run.x.size());
    tr.vs.reserve(run.x.size());
    for (const auto& x : run.x) {
        tr.ys.push_back(x[0]);
        tr.vs.push_back(x[1]);
    }
    if (run.terminated_at) {
        for (auto g : {GuardLine::y_zero, GuardLine::discriminant, GuardLine::infinity}) {
            if (*run.terminated_at == to_string(g)) tr.terminated_at = g;
        }
        if (!tr.terminated_at) tr.terminated_at = GuardLine::step_underflow;
    }
    return tr;
}

Trajectory integrate_branch_sampled(double y0, double z0, double z1, int n, const BranchId& branch,
                                    const ReducedParams& p, const IntegrateOptions& options) {
    if (n < 1) fail(ErrorKind::ParamError, "integrate_branch_sampled needs n >= 1");
    Trajectory out;
    out.zs.push_back(z0);
    out.ys.push_back(y0);
    out.vs.push_back(options.v0);
    IntegrateOptions opt = options;
    double y = y0;
    for (int i = 1; i <= n; ++i) {
        const double za = out.zs.back();
        const double zb = z0 + (z1 - z0) * i / n;
        opt.v0 = out.vs.back();
        const Trajectory seg = integrate_branch(y, za, zb, branch, p, opt);
        y = seg.ys.back();
        if (seg.terminated_at) {
            if (seg.zs.back() != za) {
                out.zs.push_back(seg.zs.back());
                out.ys.push_back(seg.ys.back());
                out.vs.push_back(seg.vs.back());
            }
            out.terminated_at = seg.terminated_at;
            return out;
        }
        out.zs.push_back(zb);
        out.ys.push_back(y);
        out.vs.push_back(seg.vs.back());
    }
    return out;
}

}  // namespace bsfb::reduction
