#include <doctest.h>

#include <cmath>
#include <random>

#include "bsfb/closed_form.hpp"
#include "bsfb/error.hpp"
#include "bsfb/symmetry.hpp"

using namespace bsfb;
using namespace bsfb::symmetry;

namespace {

double field_gap(const VectorField& A, const VectorField& B, const Point& p) {
    const Point a = A.at(p), b = B.at(p);
    return std::max({std::fabs(a.S - b.S), std::fabs(a.t - b.t), std::fabs(a.u - b.u)});
}

VectorField scaled(const VectorField& V, double s) { return combine({V}, {s}); }

VectorField zero_field() {
    auto z = [](const Point&) { return 0.0; };
    return {"0", z, z, z};
}

}  // namespace

TEST_CASE("generator counts and coefficients") {
    const auto general = generators(1.0, false);
    REQUIRE(general.size() == 3);
    const Point p{2.5, 0.3, -1.0};
    CHECK(general[1].at(p).u == 2.5);
    CHECK(general[1].at(p).S == 0.0);
    CHECK(general[0].at(p).t == 1.0);

    const auto k1 = generators(1.0, true);
    REQUIRE(k1.size() == 4);
    CHECK(k1[3].at(p).S == 2.5);
    CHECK(k1[3].at(p).u == 0.0);
    const auto k0 = generators(0.0, true);
    CHECK(k0[3].at(p).u == -1.0);
}

TEST_CASE("bracket table at random points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> S(0.2, 4.0), t(-1.0, 1.0), u(-3.0, 3.0);
    for (double k : {0.0, 1.0, 2.0, -0.5}) {
        const auto V = generators(k, true);
        // Expected [Vi, Vj] for i < j.
        const VectorField zero = zero_field();
        const VectorField expected[4][4] = {
            {zero, zero, zero, zero},
            {zero, zero, zero, scaled(V[1], -k)},
            {zero, zero, zero, scaled(V[2], 1.0 - k)},
            {zero, zero, zero, zero},
        };
        for (int n = 0; n < 100; ++n) {
            const Point p{S(rng), t(rng), u(rng)};
            for (int i = 0; i < 4; ++i) {
                for (int j = i + 1; j < 4; ++j) {
                    const auto br = lie_bracket(V[i], V[j]);
                    CHECK(field_gap(br, expected[i][j], p) < 1e-7);
                }
            }
        }
    }
}

TEST_CASE("bracket is antisymmetric") {
    const auto V = generators(2.0, true);
    const Point p{1.3, 0.2, 0.7};
    const auto ab = lie_bracket(V[1], V[3]);
    const auto ba = lie_bracket(V[3], V[1]);
    CHECK(field_gap(ab, scaled(ba, -1.0), p) < 1e-9);
}

TEST_CASE("group action at epsilon zero is the identity") {
    const Point p{1.7, 0.4, -2.2};
    for (double k : {0.0, 1.0, 2.0, -0.5}) {
        const Point q = group_action(p, {0.0, 0.8, -0.3, 1.1, 0.6}, k, true);
        CHECK(q.S == doctest::Approx(p.S));
        CHECK(q.t == doctest::Approx(p.t));
        CHECK(q.u == doctest::Approx(p.u));
    }
}

TEST_CASE("group action examples") {
    const Point p{1.5, 0.25, 3.0};
    const Point q = group_action(p, {std::log(2.0), 1.0, 0.7, 0.0, 0.0}, 1.0, true);
    CHECK(q.S == doctest::Approx(3.0));
    CHECK(q.t == doctest::Approx(0.25 + 0.7 * std::log(2.0)));
    CHECK(q.u == doctest::Approx(3.0));

    const Point r = group_action(p, {1.0, 0.0, 1.0, 2.0, 3.0}, 1.0, false);
    CHECK(r.S == 1.5);
    CHECK(r.t == doctest::Approx(1.25));
    CHECK(r.u == doctest::Approx(3.0 + 2.0 * 1.5 + 3.0));
}

TEST_CASE("special action needs a1") {
    try {
        group_action({1, 0, 0}, {0.5, 0.0, 1.0, 0.0, 0.0}, 2.0, true);
        FAIL("expected ParamError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ParamError);
    }
}

TEST_CASE("one-parameter subgroups compose additively") {
    const Point p{0.9, -0.2, 1.4};
    for (double k : {0.0, 1.0, 2.0, -0.5}) {
        for (bool special : {false, true}) {
            GroupElement g1{0.4, 0.6, -0.5, 0.9, -1.2};
            GroupElement g2 = g1;
            g2.epsilon = -1.1;
            GroupElement g12 = g1;
            g12.epsilon = g1.epsilon + g2.epsilon;
            const Point a = group_action(group_action(p, g1, k, special), g2, k, special);
            const Point b = group_action(p, g12, k, special);
            CHECK(a.S == doctest::Approx(b.S).epsilon(1e-12));
            CHECK(a.t == doctest::Approx(b.t).epsilon(1e-12));
            CHECK(a.u == doctest::Approx(b.u).epsilon(1e-12));
        }
    }
}

TEST_CASE("flow matches the generator to first order") {
    const double h = 1e-6;
    const Point p{1.2, 0.1, 0.8};
    for (double k : {0.0, 1.0, 2.0, -0.5}) {
        GroupElement g{h, 0.7, 0.4, -0.6, 1.3};
        const Point q = group_action(p, g, k, true);
        const auto V = generators(k, true);
        const VectorField W = combine(V, {g.a2, g.a3, g.a4, g.a1});
        const Point w = W.at(p);
        CHECK((q.S - p.S) / h == doctest::Approx(w.S).epsilon(1e-5));
        CHECK((q.t - p.t) / h == doctest::Approx(w.t).epsilon(1e-5));
        CHECK((q.u - p.u) / h == doctest::Approx(w.u).epsilon(1e-5));
    }
}

TEST_CASE("invariants") {
    const Invariants a = invariants({1.0, 0.0, 5.0}, 1.0, 0.3);
    CHECK(a.z == 0.0);
    CHECK(a.v == 5.0);
    const Invariants b = invariants({std::exp(1.0), 0.0, 1.0}, 2.0, 1.0);
    CHECK(b.z == doctest::Approx(1.0));
    CHECK(b.v == doctest::Approx(std::exp(1.0)));
    try {
        invariants({-1.0, 0.0, 1.0}, 1.0, 1.0);
        FAIL("expected DomainError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DomainError);
    }
}

TEST_CASE("invariants are constant along orbits") {
    const Point p{1.6, 0.35, -0.9};
    for (double k : {0.0, 1.0, 2.0, -0.5}) {
        GroupElement g{0.0, 0.8, 1.7, 0.0, 0.0};
        const double a = orbit_invariant_speed(g);
        const Invariants base = invariants(p, k, a);
        for (double eps = -2.0; eps <= 2.0; eps += 0.25) {
            g.epsilon = eps;
            const Invariants moved = invariants(group_action(p, g, k, true), k, a);
            CHECK(std::fabs(moved.z - base.z) < 1e-12);
            CHECK(std::fabs(moved.v - base.v) < 1e-12 * std::max(1.0, std::fabs(base.v)));
        }
    }
}

TEST_CASE("transported exact solution still solves the PDE") {
    closed_form::SolutionBranch br;
    br.family = closed_form::Family::euler_plus;
    br.c = 1.0;
    const auto params = ModelParams::with_feedback(1.0, 1.0, 1.0);
    const Surface u = closed_form::surface(br, params);
    SampleBox box;
    box.S_min = 0.5;
    box.S_max = 2.0;
    box.nS = 20;
    box.nT = 8;
    const double base = sample_pde_residual(u, params, box).max_abs;
    for (double eps : {-1.0, -0.4, 0.5, 1.0}) {
        const GroupElement g{eps, 0.6, 0.3, -0.8, 0.5};
        const auto moved = transport(u, g, 1.0, true);
        const double r = sample_pde_residual(moved, params, box).max_abs;
        CHECK(r < std::max(10.0 * base, 1e-8));
        CHECK(r < 1e-5);
    }
}

TEST_CASE("grid transport re-interpolates onto the image grid") {
    closed_form::SolutionBranch br;
    br.family = closed_form::Family::euler_plus;
    br.c = 1.0;
    const auto params = ModelParams::with_feedback(1.0, 1.0, 1.0);
    GridSpec src;
    src.S_min = 0.25;
    src.S_max = 4.0;
    src.nS = 400;
    src.nT = 16;
    Field f(src);
    for (int n = 0; n <= src.nT; ++n) {
        for (int i = 0; i < src.nS; ++i) {
            f.at(n, i) = closed_form::u_family(br, params, src.S(i), src.t(n));
        }
    }
    const GroupElement g{0.2, 0.5, 0.4, 0.3, -0.2};
    GridSpec dst = src;
    dst.S_min = 0.5;
    dst.S_max = 3.0;
    dst.nS = 50;
    dst.t_start = src.t_start + g.a2 * g.epsilon;
    dst.t_end = src.t_end + g.a2 * g.epsilon;
    const Field out = transport_grid(f, g, 1.0, true, dst);
    const auto exact = transport(closed_form::surface(br, params), g, 1.0, true);
    double err = 0.0;
    for (int n = 0; n <= dst.nT; ++n) {
        for (int i = 0; i < dst.nS; ++i) {
            err = std::max(err, std::fabs(out.at(n, i) -
                                          static_cast<double>(exact(dst.S(i), dst.t(n)))));
        }
    }
    CHECK(err < 1e-6);
}
