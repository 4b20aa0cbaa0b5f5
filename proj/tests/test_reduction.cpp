#include <doctest.h>

#include <cmath>
#include <random>

#include "bsfb/closed_form.hpp"
#include "bsfb/error.hpp"
#include "bsfb/reduction.hpp"
#include "oracles.hpp"

using namespace bsfb;
using namespace bsfb::reduction;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected a bsfb::Error");
    return ErrorKind::ConfigError;
}

double rel_gap(std::complex<double> a, std::complex<double> b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

}  // namespace

TEST_CASE("reduced parameters") {
    const ReducedParams p(0.125, 2.0, 1.0, 0.5);
    CHECK(p.q() * p.a() == doctest::Approx(0.5 * 0.5 / 2.0));
    CHECK(p.q() == doctest::Approx(1.0));
    CHECK(p.discriminant_line() == doctest::Approx(0.125));
    CHECK(ReducedParams::from_q(4.0, 1.0).q() == doctest::Approx(4.0));
    CHECK(kind_of([] { ReducedParams(0.0, 1.0, 1.0, 1.0); }) == ErrorKind::ParamError);
    CHECK(kind_of([] { ReducedParams(1.0, 0.0, 1.0, 1.0); }) == ErrorKind::ParamError);
    CHECK(kind_of([] { ReducedParams(1.0, 1.0, 1.0, 0.0); }) == ErrorKind::DomainError);
    CHECK(kind_of([] { ReducedParams::from_q(0.0, 1.0); }) == ErrorKind::RegimeError);
}

TEST_CASE("reduced ODE residual at known solutions") {
    CHECK(reduced_ode_residual(0.0, 0.0, 0.0, ReducedParams::from_q(3.0, 1.0, 2.0)) == 0.0);
    const auto p = ReducedParams::from_q(4.0, 1.0);
    CHECK(reduced_ode_residual(0.0, 1.0, 0.0, p) == doctest::Approx(0.0));
    CHECK(std::fabs(reduced_ode_residual(0.0, -3.0, 0.0, p)) < 1e-15);
    CHECK(std::fabs(autonomous_residual(1.0, 0.0, 4.0, 1.0)) < 1e-15);
    CHECK(kind_of([&] { reduced_ode_residual(0.0, 0.0, 1.0, p); }) ==
          ErrorKind::DegenerateDenominator);
}

TEST_CASE("branch right-hand side examples") {
    const auto p = ReducedParams::from_q(4.0, 1.0);
    CHECK(std::fabs(branch_rhs(0.999999999999, 0.0, BranchId::make(Sign::minus, 4.0), p)) < 1e-5);
    CHECK(branch_rhs(1.0, 0.0, BranchId::make(Sign::minus, 4.0), p) == doctest::Approx(0.0));
    CHECK(branch_rhs(1.0, 0.0, BranchId::make(Sign::plus, 4.0), p) == doctest::Approx(0.0));

    // Principal sheet diverges like −q/(b² y) as y → 0⁺.
    const auto principal = BranchId::make(Sign::minus, 4.0);
    REQUIRE(principal.sheet == Sheet::principal);
    for (double y : {1e-3, 1e-5, 1e-7}) {
        CHECK(branch_rhs(y, 0.0, principal, p) * y / -4.0 == doctest::Approx(1.0).epsilon(10 * y));
    }

    const auto q1 = ReducedParams::from_q(1.0, 1.0);
    const double y = 0.125;
    const double value = branch_rhs(y, 0.0, BranchId::make(Sign::plus, 1.0), q1);
    const double expected = (y * y + y - 0.5 + std::sqrt(0.25 - y)) / y;
    CHECK(value == doctest::Approx(expected));
    CHECK(std::fabs(quadratic_form(y, value, 1.0, 1.0)) < 1e-12);

    CHECK(kind_of([&] { branch_rhs(0.0, 0.0, principal, p); }) == ErrorKind::SingularLine);
    CHECK(kind_of([&] { branch_rhs(1.5, 0.0, principal, p); }) == ErrorKind::BeyondDiscriminant);
}

TEST_CASE("branches are the two roots of the quadratic form") {
    std::mt19937_64 rng(3);
    for (double q : {4.0, 2.0, 1.0, 9.0, -1.0, -3.0}) {
        for (double b : {1.0, 0.5, -2.0}) {
            const auto p = ReducedParams::from_q(q, b);
            const double edge = q / (4 * b);
            // The real radicand needs (q/b³)(q/(4b) − y) ≥ 0.
            const double dir = q * b > 0 ? -1.0 : 1.0;
            std::uniform_real_distribution<double> off(1e-3, 3.0);
            for (int i = 0; i < 40; ++i) {
                const double y = edge + dir * off(rng);
                if (std::fabs(y) < 1e-6) continue;
                for (auto sign : {Sign::minus, Sign::plus}) {
                    const auto id = BranchId::make(sign, q);
                    const double yz = branch_rhs(y, 0.0, id, p);
                    const auto w = curve_eval(y, id.sheet, p);
                    CHECK(rel_gap(yz, w) < 1e-10);
                    const auto roots = oracle::curve_roots(y, q, b);
                    CHECK(std::min(rel_gap(yz, roots[0]), rel_gap(yz, roots[1])) < 1e-9);
                }
            }
        }
    }
}

TEST_CASE("general k branch equation solves the reduced ODE") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> v(-2.0, 2.0), off(0.05, 2.0);
    for (double k : {0.0, 2.0, -0.5, 1.0}) {
        for (double q : {4.0, 2.0, -1.0}) {
            const auto p = ReducedParams::from_q(q, 1.0, k);
            const double dir = q > 0 ? -1.0 : 1.0;
            for (int i = 0; i < 30; ++i) {
                const double x = q / 4.0 + dir * off(rng);
                if (std::fabs(x) < 1e-3) continue;
                const double vv = v(rng);
                for (auto sign : {Sign::minus, Sign::plus}) {
                    const double xz = x * branch_rhs_v(x, vv, BranchId::make(sign, q), p);
                    const double r = reduced_ode_residual(vv, x, xz, p);
                    CHECK(std::fabs(r) < 1e-9 * std::max(1.0, std::fabs(xz)));
                }
            }
        }
    }
}

TEST_CASE("exceptional solution exists only at q = 4") {
    CHECK(exceptional_probe(4.0, 1.0).residual() < 1e-12);
    CHECK(exceptional_probe(4.0, 2.5).residual() < 1e-12);
    CHECK(exceptional_probe(3.9, 1.0).residual() > 1e-3);
    CHECK(exceptional_probe(4.1, 1.0).residual() > 1e-3);
    CHECK(exceptional_probe(3.9, 1.0).F != 0.0);
}

TEST_CASE("constant slopes") {
    const auto s4 = constant_slopes(4.0, 1.0);
    CHECK(s4[0] == doctest::Approx(-3.0));
    CHECK(s4[1] == doctest::Approx(1.0));
    const auto s9 = constant_slopes(9.0, 1.0);
    CHECK(s9[0] == doctest::Approx(-4.0));
    CHECK(s9[1] == doctest::Approx(2.0));
    CHECK(kind_of([] { constant_slopes(-1.0, 1.0); }) == ErrorKind::RegimeError);
}

TEST_CASE("uniformization stays on the curve") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> pp(-3.0, 3.0);
    for (double q : {4.0, 2.0, -1.0}) {
        const auto p = ReducedParams::from_q(q, 1.0);
        for (int i = 0; i < 100; ++i) {
            const double t = pp(rng);
            if (std::fabs(t + 1.0) < 1e-3) continue;
            const auto pt = uniformize(t, p);
            const double scale = std::max({1.0, std::fabs(pt.zeta * pt.w * pt.w), std::fabs(pt.zeta)});
            CHECK(std::abs(curve_F(pt.zeta, pt.w, q, 1.0)) / scale < 1e-10);
        }
    }
    const auto p4 = ReducedParams::from_q(4.0, 1.0);
    CHECK(uniformize(1.0, p4).zeta == 0.0);
    CHECK(uniformize(1.0, p4).w == 0.0);
    const auto p3 = ReducedParams::from_q(3.0, 2.0);
    CHECK(uniformize(0.0, p3).zeta == doctest::Approx(3.0 / 8.0));
    CHECK(uniformize(0.0, p3).w == doctest::Approx(value_at_discriminant(3.0, 2.0)));
    CHECK(kind_of([&] { uniformize(-1.0, p4); }) == ErrorKind::PoleAt);
}

TEST_CASE("double root at the branch point") {
    for (double q : {4.0, 2.0, 7.0}) {
        const double b = 1.5;
        const double z2 = q / (4 * b);
        const double w2 = value_at_discriminant(q, b);
        CHECK(std::abs(curve_F(z2, w2, q, b)) < 1e-12);
        const auto roots = oracle::curve_roots(z2, q, b);
        CHECK(std::abs(roots[0] - roots[1]) < 1e-6);
        CHECK(std::abs(roots[0] - w2) < 1e-6);
    }
    const auto p = ReducedParams::from_q(4.0, 1.0);
    CHECK(kind_of([&] { curve_eval(1.0, Sheet::principal, p); }) == ErrorKind::BranchPointProximity);
    CHECK(kind_of([&] { curve_eval(0.0, Sheet::principal, p); }) == ErrorKind::PoleAt);
    CHECK(finite_branch_points(4.0, 2.0)[1] == 0.5);
}

TEST_CASE("local expansions at zeta = 0 match the curve") {
    for (double q : {4.0, 2.0, 1.0, -1.0}) {
        for (double b : {1.0, 2.0}) {
            const auto p = ReducedParams::from_q(q, b);
            for (auto sheet : {Sheet::principal, Sheet::second}) {
                const auto lead = leading_term_at_zero(sheet, q, b);
                double prev = 1e300;
                for (int e = 1; e <= 6; ++e) {
                    // Approach from the side where the radicand is real.
                    const double zeta = (q * b > 0 ? -1.0 : 1.0) * std::pow(10.0, -e);
                    const double ratio = curve_eval(zeta, sheet, p).real() / lead(zeta);
                    const double err = std::fabs(ratio - 1.0);
                    CHECK(err <= prev * 1.0001);
                    prev = err;
                }
                CHECK(prev < 0.02);
            }
        }
    }
}

TEST_CASE("p from v_z") {
    const auto p = ReducedParams::from_q(4.0, 1.0);
    CHECK(p_from_vz(1.0, p) == 0.0);
    CHECK(p_from_vz(-3.0, p) == doctest::Approx(2.0));
    CHECK(p_from_vz(0.0, p) == 1.0);
    CHECK(kind_of([&] { p_from_vz(2.0, p); }) == ErrorKind::DomainError);
    CHECK(chart_parameter(-3.0, p) == doctest::Approx(-2.0));
    CHECK(chart_parameter(-3.0, ReducedParams::from_q(-4.0, -1.0)) == doctest::Approx(2.0));
    // uniformize∘p_from_vz returns ζ = v_z.
    for (double vz : {-2.0, -0.5, 0.3, 0.9}) {
        CHECK(uniformize(p_from_vz(vz, p), p).zeta == doctest::Approx(vz));
    }
}

TEST_CASE("implicit relations at q = 4 exponentiate to the cubics") {
    for (double x : {-3.0, -1.7, 0.2, 0.5, 2.5, 4.0}) {
        const double lm = implicit_relation(x, 4.0, Sign::minus);
        const double lp = implicit_relation(x, 4.0, Sign::plus);
        CHECK(lm - 4.0 * std::log(std::fabs(oracle::cubm(x, 0))) ==
              doctest::Approx(4.0 * std::log(2.0)));
        CHECK(lp - 4.0 * std::log(std::fabs(oracle::cubp(x, 0))) ==
              doctest::Approx(4.0 * std::log(2.0)));
    }
    CHECK(implicit_relation_slope(4.0) == 6.0);
    CHECK(implicit_relation_slope(1.0) == 1.0);
    CHECK(implicit_relation_slope(-1.0) == 4.0);
}

TEST_CASE("implicit relation at q = 1") {
    const double x = 0.4;
    CHECK(implicit_relation(x, 1.0, Sign::minus) ==
          doctest::Approx(1.0 / (1.0 - x) + 0.25 * std::log(std::pow(x + 3.0, 3) * std::pow(1.0 - x, 5))));
    CHECK(implicit_relation(-x, 1.0, Sign::plus) == doctest::Approx(implicit_relation(x, 1.0, Sign::minus)));
    CHECK(kind_of([] { implicit_relation(1.0, 1.0, Sign::minus); }) == ErrorKind::LogDomain);
    CHECK(kind_of([] { implicit_relation(-3.0, 1.0, Sign::minus); }) == ErrorKind::LogDomain);
    CHECK(kind_of([] { implicit_relation(0.5, 0.0, Sign::minus); }) == ErrorKind::RegimeError);
}

TEST_CASE("implicit relations integrate the branch equation") {
    // d/dz LHS(p_c(y(z))) = slope with y_z from the branch.
    for (double q : {2.0, 4.0, 1.0, -1.0, 9.0}) {
        const auto p = ReducedParams::from_q(q, 1.0);
        for (auto sign : {Sign::minus, Sign::plus}) {
            const auto id = BranchId::make(sign, q);
            for (double y : {-2.7, -0.6, 0.05, 0.2}) {
                if (q < 0 && y < q / 4.0) continue;
                if (q > 0 && y > q / 4.0) continue;
                const double yz = branch_rhs(y, 0.0, id, p);
                const double h = 1e-6 * std::max(1.0, std::fabs(y));
                auto L = [&](double yy) { return implicit_relation(chart_parameter(yy, p), q, sign); };
                const double dL = (L(y + h) - L(y - h)) / (2 * h);
                CHECK(dL * yz == doctest::Approx(implicit_relation_slope(q)).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("integration guards") {
    const auto p = ReducedParams::from_q(4.0, 1.0);
    const auto id = BranchId::make(Sign::minus, 4.0);
    CHECK(kind_of([&] { integrate_branch(1.0, 0.0, 1.0, id, p); }) == ErrorKind::ImmediateSingular);
    CHECK(kind_of([&] { integrate_branch(0.0, 0.0, 1.0, id, p); }) == ErrorKind::ImmediateSingular);

    const auto q2 = ReducedParams::from_q(2.0, 1.0);
    const auto tr = integrate_branch(0.1, 0.0, 1.0, BranchId::make(Sign::minus, 2.0), q2);
    REQUIRE(tr.terminated_at);
    CHECK(*tr.terminated_at == GuardLine::y_zero);
    CHECK(tr.zs.back() < 0.01);
    for (std::size_t i = 1; i < tr.zs.size(); ++i) CHECK(tr.zs[i] > tr.zs[i - 1]);
}

TEST_CASE("constant-slope start stays put") {
    for (double q : {2.0, 3.0, 0.5}) {
        const auto p = ReducedParams::from_q(q, 1.0);
        const double y0 = -1.0 + std::sqrt(q);
        const auto tr = integrate_branch_sampled(y0, 0.0, 2.0, 20, BranchId::make(Sign::plus, q), p);
        CHECK_FALSE(tr.terminated_at);
        for (double y : tr.ys) CHECK(y == doctest::Approx(y0).epsilon(1e-12));
        CHECK(tr.vs.back() == doctest::Approx(2.0 * y0));
    }
}

TEST_CASE("adaptive integration agrees with fixed-step RK4") {
    const double q = 2.0;
    const auto p = ReducedParams::from_q(q, 1.0);
    const auto id = BranchId::make(Sign::plus, q);
    const auto tr = integrate_branch_sampled(0.1, 0.0, 1.0, 10, id, p);
    REQUIRE_FALSE(tr.terminated_at);
    const double ref = oracle::rk4([&](double y) { return branch_rhs(y, 0.0, id, p); }, 0.1, 0.0, 1.0, 4000);
    CHECK(tr.ys.back() == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("minus branch at q = 4 reproduces the euler_plus slope") {
    const auto p = ReducedParams::from_q(4.0, 1.0);
    const double c = 1.0;
    const auto tr = integrate_branch_sampled(closed_form::vz_plus(0.0, c, 1.0), 0.0, 2.0, 100,
                                             BranchId::make(Sign::minus, 4.0), p);
    REQUIRE_FALSE(tr.terminated_at);
    for (std::size_t i = 0; i < tr.zs.size(); ++i) {
        CHECK(std::fabs(tr.ys[i] - closed_form::vz_plus(tr.zs[i], c, 1.0)) < 1e-6);
    }
    // v accumulates the integral of y.
    CHECK(tr.vs.back() == doctest::Approx(closed_form::v_plus(2.0, c, 1.0, 0.0) -
                                          closed_form::v_plus(0.0, c, 1.0, 0.0))
                              .epsilon(1e-8));
}

TEST_CASE("involution maps cubm solutions to cubp solutions") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> pp(-4.0, 4.0), zz(-3.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const double p = pp(rng), z = zz(rng);
        const double e = std::exp(1.5 * z);
        const double c = static_cast<double>(oracle::cubm(p, 0)) / e;
        const double lhs = static_cast<double>(oracle::cubp(-p, 0));
        CHECK(std::fabs(lhs - (-c) * e) < 1e-12 * std::max(1.0, std::fabs(lhs)));
        CHECK(std::fabs(closed_form::cubic_defect(-p, z, -c, closed_form::CubicForm::cubp)) <
              1e-12 * std::max(1.0, std::fabs(lhs)));
    }
    const auto id = BranchId::make(Sign::minus, 4.0);
    CHECK(id.involuted(4.0).sheet == Sheet::second);
    CHECK(id.involuted(4.0).sign == Sign::plus);
}
