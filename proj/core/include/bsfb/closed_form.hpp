#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bsfb/model.hpp"

namespace bsfb::closed_form {

/// Exact invariant solutions of v_z + q(v_zz − v_z)/(1 − b(v_zz − v_z))² = 0.
enum class Family {
    constant,               ///< v = d
    line_minus3,            ///< v = −3z/b + d (q = 4)
    line_exceptional,       ///< v = z/b + d (q = 4, the exceptional solution)
    const_slope_general_q,  ///< v = (−1 ± √q) z/b + d
    euler_plus,             ///< c > 0, all z
    trig1,                  ///< c < 0, z ≤ z*
    trig2,                  ///< c < 0, z ≤ z*
    three_piece,            ///< c < 0, trigonometric below z*, hyperbolic above
    degenerate_u0,          ///< u-space family with a vanishing denominator
};

std::string to_string(Family f);
std::optional<Family> family_from_string(std::string_view name);

struct SolutionBranch {
    Family family = Family::euler_plus;
    double c = 1.0;  ///< signed free constant
    double d = 0.0;
    double b = 1.0;
    double q = 4.0;
    int root_sign = 1;  ///< const_slope_general_q picks (−1 + root_sign·√q)/b
    std::function<double(double)> c1;  ///< degenerate_u0 only
    std::function<double(double)> c2;

    /// ParamError when the sign of c, q or b does not suit the family.
    void validate() const;
    [[nodiscard]] bool needs_q4() const;
};

enum class CubicForm { cubm, cubp };

/// Real roots, sorted, of (p−1)²(p+2) = c e^{3z/2} (cubm) or
/// (p+1)²(p−2) = c e^{3z/2} (cubp). Repeated roots are listed twice.
std::vector<double> cubic_roots_p(double z, double c, CubicForm which);

/// Left-hand side of the cubic minus c e^{3z/2}.
double cubic_defect(double p, double z, double c, CubicForm which);

/// End of the trigonometric domain, (2/3) ln(4/|c|): the point where
/// |c| e^{3z/2}/2 reaches 2.
double domain_end(double abs_c);

template <class T>
T v_plus(T z, double c, double b, double d);
template <class T>
T vz_plus(T z, double c, double b);

/// DomainEnd for z beyond domain_end(abs_c).
template <class T>
T v1(T z, double abs_c, double b, double d);
template <class T>
T v2(T z, double abs_c, double b, double d);
template <class T>
T v31(T z, double abs_c, double b, double d);
/// Hyperbolic piece, z ≥ z*; DomainEnd below.
template <class T>
T v32(T z, double abs_c, double b, double d);
/// v31 for z ≤ z*, v32 beyond.
template <class T>
T v3(T z, double abs_c, double b, double d);

/// v(z) of any v-space family.
template <class T>
T evaluate_v(const SolutionBranch& branch, T z);

/// Analytic v_z. For the c < 0 families this is (1 − p²)/b at the
/// matching root p of the cubic.
double evaluate_vz(const SolutionBranch& branch, double z);

/// Whether z lies in the closed domain of the family.
bool in_domain(const SolutionBranch& branch, double z);

/// Distance from z to the nearest point where the family stops being
/// smooth (z* for the c < 0 families), infinity otherwise.
double distance_to_singularity(const SolutionBranch& branch, double z);

/// Constant and linear families for the given q, b: v = d and the two
/// constant slopes. RegimeError for q < 0.
std::vector<SolutionBranch> linear_families(double q, double b, double d = 0.0);

/// Slope of a linear family.
double linear_slope(const SolutionBranch& branch);

/// Invariant of the b = 0 reduction at q = 4: v = d1 + d2 e^{3z/4}.
double linear_mode_solution(double z, double d1, double d2);

/// Invariant speed a = σ²/(2q); z = log S + a t.
double invariant_speed(const SolutionBranch& branch, const ModelParams& params);

/// u(S, t) = v(log S + a t) for k = 1, with b taken from `params`
/// (the branch's own b is ignored). degenerate_u0 accepts any k.
/// DomainError outside the family's domain.
template <class T>
T u_family(const SolutionBranch& branch, const ModelParams& params, T S, T t);

/// The same as a surface for residual sweeps.
Surface surface(const SolutionBranch& branch, const ModelParams& params);

}  // namespace bsfb::closed_form
