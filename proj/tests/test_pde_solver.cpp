#include <doctest.h>

#include <cmath>

#include "bsfb/closed_form.hpp"
#include "bsfb/error.hpp"
#include "bsfb/pde_solver.hpp"

using namespace bsfb;
using namespace bsfb::pde;

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

GridSpec grid(int n, double S_min = std::exp(-1.0), double S_max = std::exp(1.0)) {
    GridSpec g;
    g.S_min = S_min;
    g.S_max = S_max;
    g.nS = n;
    g.nT = n;
    g.t_start = 0.0;
    g.t_end = 1.0;
    return g;
}

std::vector<double> sample(const GridSpec& g, const Data& f, double t) {
    std::vector<double> s(g.nS);
    for (int i = 0; i < g.nS; ++i) s[i] = f(g.S(i), t);
    return s;
}

closed_form::SolutionBranch family(closed_form::Family f, double c) {
    closed_form::SolutionBranch br;
    br.family = f;
    br.c = c;
    return br;
}

const ModelParams kParams = ModelParams::with_feedback(1.0, 1.0, 1.0);

}  // namespace

TEST_CASE("grid validation") {
    auto g = grid(64);
    CHECK_NOTHROW(g.validate());
    g.nS = 8;
    CHECK(kind_of([&] { g.validate(); }) == ErrorKind::DomainError);
    g = grid(64, 2.0, 1.0);
    CHECK(kind_of([&] { g.validate(); }) == ErrorKind::DomainError);
    g = grid(64, -1.0, 1.0);
    CHECK(kind_of([&] { g.validate(); }) == ErrorKind::DomainError);
    g = grid(64);
    g.t_end = g.t_start;
    CHECK(kind_of([&] { g.validate(); }) == ErrorKind::DomainError);
    g = grid(32);
    CHECK(g.S(0) == doctest::Approx(std::exp(-1.0)));
    CHECK(g.S(31) == doctest::Approx(std::exp(1.0)));
    CHECK(g.dx() == doctest::Approx(2.0 / 31));
}

TEST_CASE("a constant slice is a fixed point") {
    const auto g = grid(32);
    const std::vector<double> slice(g.nS, 3.25);
    const auto next = step(slice, 1.0, 0.9, g, kParams, {3.25, 3.25});
    for (double v : next) CHECK(v == doctest::Approx(3.25).epsilon(1e-14));
}

TEST_CASE("linear-in-log-S families are reproduced to rounding") {
    for (auto f : {closed_form::Family::constant, closed_form::Family::line_minus3,
                   closed_form::Family::line_exceptional}) {
        const auto rep = convergence_study(family(f, 0.0), kParams, {grid(32), grid(64)});
        for (const auto& r : rep.rows) CHECK(r.max_error < 1e-11);
    }
}

TEST_CASE("second-order convergence on euler_plus") {
    const auto rep =
        convergence_study(family(closed_form::Family::euler_plus, 1.0), kParams, {grid(64), grid(128), grid(256)});
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.direction == Direction::forward);
    CHECK(rep.monotone());
    CHECK(rep.fitted_order >= 1.8);
    for (double o : rep.orders) CHECK(o >= 1.8);
    CHECK(rep.rows[2].max_error < 1e-5);
}

TEST_CASE("direction selection") {
    const auto g = grid(64);
    const auto br = family(closed_form::Family::euler_plus, 1.0);
    const auto slice = sample(g, [&](double S, double t) { return closed_form::u_family(br, kParams, S, t); }, 0.0);
    CHECK(choose_direction(slice, g, kParams) == Direction::forward);
    for (double s : diffusion_sign(slice, g, kParams)) CHECK(s < 0.0);

    // u = S²/8 has X = S²/4 < 1 on [0.5, 1.5]: ordinary backward diffusion.
    const auto g2 = grid(64, 0.5, 1.5);
    const auto quad = sample(g2, [](double S, double) { return S * S / 8; }, 0.0);
    CHECK(choose_direction(quad, g2, kParams) == Direction::backward);

    // X crosses 1 on [0.5, 3].
    const auto g3 = grid(64, 0.5, 3.0);
    const auto mixed = sample(g3, [](double S, double) { return S * S / 8; }, 0.0);
    CHECK(kind_of([&] { choose_direction(mixed, g3, kParams); }) == ErrorKind::IllPosed);
}

TEST_CASE("vanishing denominator is reported") {
    const auto g = grid(32);
    // −log S is linear in log S, so the discrete X is exactly 1.
    const auto u0 = sample(g, [](double S, double t) { return -std::log(S) + t; }, 1.0);
    CHECK(kind_of([&] { step(u0, 1.0, 0.95, g, kParams, {u0.front(), u0.back()}); }) ==
          ErrorKind::DenominatorBreach);
    CHECK(kind_of([&] { choose_direction(u0, g, kParams); }) == ErrorKind::IllPosed);

    // With an S c1(t) term the discrete X is 1 + O(h²).
    const auto u1 = sample(g, [](double S, double t) { return -std::log(S) + 0.5 * S + t; }, 1.0);
    SolverOptions loose;
    loose.den_tol = 1e-2;
    CHECK(kind_of([&] { step(u1, 1.0, 0.95, g, kParams, {u1.front(), u1.back()}, loose); }) ==
          ErrorKind::DenominatorBreach);
}

TEST_CASE("b = 0 reduces to the Black-Scholes operator") {
    // u = S solves it; the log-grid stencil is exact only up to O(h²).
    const auto lin = ModelParams::with_feedback(1.0, 0.0, 1.0);
    const auto g = grid(64);
    const auto slice = sample(g, [](double S, double) { return S; }, 1.0);
    const auto prev = step_backward(slice, 1.0, 0.05, g, lin, {g.S(0), g.S(g.nS - 1)});
    for (int i = 0; i < g.nS; ++i) CHECK(prev[i] == doctest::Approx(g.S(i)).epsilon(1e-5));
}

TEST_CASE("explicit fallback") {
    SolverOptions opt;
    opt.max_newton = 0;
    const auto br = family(closed_form::Family::euler_plus, 1.0);
    const Data exact = [&](double S, double t) { return closed_form::u_family(br, kParams, S, t); };
    auto g = grid(32);
    g.nT = 16;
    opt.direction = Direction::forward;
    const auto sol = solve(exact, g, kParams, opt);
    CHECK(sol.fallback_steps == g.nT);
    double err = 0.0;
    for (int i = 0; i < g.nS; ++i) err = std::max(err, std::fabs(sol.field.at(g.nT, i) - exact(g.S(i), 1.0)));
    CHECK(err < 1e-2);

    opt.explicit_fallback = false;
    CHECK(kind_of([&] { solve(exact, g, kParams, opt); }) == ErrorKind::NonConvergence);
}

TEST_CASE("uniform grids are rejected") {
    auto g = grid(32);
    g.log_space = false;
    const std::vector<double> slice(g.nS, 1.0);
    CHECK(kind_of([&] { step(slice, 1.0, 0.9, g, kParams, {1.0, 1.0}); }) == ErrorKind::ParamError);
}

TEST_CASE("trigonometric family inside its domain") {
    const auto br = family(closed_form::Family::trig1, -1.0);
    const auto rep = convergence_study(br, kParams, {grid(32, 0.5, 1.5), grid(64, 0.5, 1.5), grid(128, 0.5, 1.5)});
    CHECK(rep.monotone());
    CHECK(rep.fitted_order >= 1.8);
}
