#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bsfb/grid.hpp"
#include "bsfb/model.hpp"

namespace bsfb::symmetry {

/// A point (S, t, u) of the base space.
struct Point {
    double S = 1.0;
    double t = 0.0;
    double u = 0.0;
};

using Coefficient = std::function<double(const Point&)>;

/// ξ ∂_S + τ ∂_t + φ ∂_u.
struct VectorField {
    std::string name;
    Coefficient xi;
    Coefficient tau;
    Coefficient phi;

    /// (ξ, τ, φ) at p.
    [[nodiscard]] Point at(const Point& p) const { return {xi(p), tau(p), phi(p)}; }
};

/// Linear combination Σ c_i V_i of fields.
VectorField combine(const std::vector<VectorField>& fields, const std::vector<double>& coeffs,
                    std::string name = "combination");

/// V1 = ∂_t, V2 = S ∂_u, V3 = ∂_u, and for λ = ωS^k also
/// V4 = S ∂_S + (1−k) u ∂_u.
std::vector<VectorField> generators(double k, bool special);

/// Commutator [V, W] with components V(W_i) − W(V_i). Directional
/// derivatives are central differences with step `h` scaled by max(1, |x|).
VectorField lie_bracket(const VectorField& V, const VectorField& W, double h = 1e-6);

/// Finite symmetry transformation: orbit parameter ε and algebra
/// coefficients (a1 S ∂_S + a2 ∂_t + (a3 S + a4 [+ (1−k) a1 u]) ∂_u).
struct GroupElement {
    double epsilon = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double a4 = 0.0;
};

/// Image of p under the one-parameter group generated by g.
///
/// `special = false` is the translation group of an arbitrary λ
/// (a1 is ignored). `special = true` is the λ = ωS^k group; it needs
/// a1 ≠ 0 (ParamError otherwise, since a1 = 0 is the general group).
Point group_action(const Point& p, const GroupElement& g, double k, bool special);

struct Invariants {
    double z = 0.0;
    double v = 0.0;
};

/// z = log S + a t, v = u S^{k−1}. Throws DomainError for S ≤ 0 and
/// ParamError for a = 0.
Invariants invariants(const Point& p, double k, double a);

/// The speed a for which log S + a t is constant along the orbits of the
/// scaling group with (a1, a2): a = −a1/a2. Throws ParamError if a2 = 0.
double orbit_invariant_speed(const GroupElement& g);

/// Graph transport of a solution surface: returns U with
/// U(S̃, t̃) = ũ where (S̃, t̃, ũ) = g·(S, t, u(S, t)). The base map does
/// not depend on u, so the preimage of (S̃, t̃) is explicit.
Surface transport(const Surface& u, const GroupElement& g, double k, bool special);

/// Grid transport: maps the sampled surface through g and re-interpolates
/// each time row onto `target` with a cubic B-spline in log S. Source rows
/// land on t̃ = t + a2 ε, so the target time grid must equal the shifted
/// source time grid; target S nodes must lie inside the image S range.
Field transport_grid(const Field& source, const GroupElement& g, double k, bool special,
                     const GridSpec& target);

}  // namespace bsfb::symmetry
