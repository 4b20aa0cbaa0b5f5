#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "bsfb/numerics.hpp"

namespace bsfb::reduction {

/// Coefficients of the invariant ODE
///   a v_z + (σ²/2) N/(1 − bN)² = 0,  N = v_zz + (1−2k) v_z − k(1−k) v,
/// with q = σ²/(2a) derived.
class ReducedParams {
public:
    /// Throws ParamError if a = 0 or b = 0, DomainError if sigma ≤ 0.
    ReducedParams(double a, double b, double k, double sigma);

    /// σ = 1 and a = 1/(2q); the usual way to pin q directly.
    static ReducedParams from_q(double q, double b, double k = 1.0);

    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double b() const noexcept { return b_; }
    [[nodiscard]] double k() const noexcept { return k_; }
    [[nodiscard]] double sigma() const noexcept { return sigma_; }
    [[nodiscard]] double q() const noexcept { return sigma_ * sigma_ / (2.0 * a_); }
    /// y = q/(4b), where the two branches merge.
    [[nodiscard]] double discriminant_line() const noexcept { return q() / (4.0 * b_); }

private:
    double a_;
    double b_;
    double k_;
    double sigma_;
};

enum class Sign { minus, plus };
enum class Sheet { principal, second };

/// Selects the radical sign of the first-order branch equations and the
/// matching sheet of the curve F(ζ, w) = 0.
///
/// The principal sheet carries the pole w ~ −q/(b²ζ) at ζ = 0; with the
/// real radical √((q/b³)(q/(4b) − ζ)) it is the sign −sgn(q).
struct BranchId {
    Sign sign = Sign::minus;
    Sheet sheet = Sheet::principal;

    static BranchId make(Sign sign, double q);
    /// The other sheet: image under p → −p, c → −c.
    [[nodiscard]] BranchId involuted(double q) const;
    [[nodiscard]] double sign_value() const noexcept { return sign == Sign::plus ? 1.0 : -1.0; }
};

Sheet sheet_for(Sign sign, double q);
std::string to_string(Sign sign);
std::string to_string(Sheet sheet);

/// a v_z + (σ²/2) N/D², D = 1 − bN. Throws DegenerateDenominator when
/// |D| is below `den_tol` (relative to max(1,|bN|)).
double reduced_ode_residual(double v, double v_z, double v_zz, const ReducedParams& p,
                            double den_tol = 1e-8);

/// The k = 1 form v_z + q (v_zz − v_z)/(1 − b(v_zz − v_z))². For b = 0 it
/// is the linear operator v_z + q (v_zz − v_z).
double autonomous_residual(double v_z, double v_zz, double q, double b, double den_tol = 1e-8);

/// F(y, y_z) = y y_z² − 2(y² + y/b − q/(2b²)) y_z + (y² + 2y/b + (1−q)/b²) y.
double quadratic_form(double y, double y_z, double q, double b);
/// ∂F/∂y_z.
double quadratic_form_dyz(double y, double y_z, double q, double b);

/// Residual of the exceptional-solution system {F = 0, ∂F/∂y_z = 0}
/// evaluated on the discriminant line y = q/(4b) with y_z = 0 (the line is
/// constant in z).
struct ExceptionalProbe {
    double y = 0.0;
    double F = 0.0;
    double dF_dyz = 0.0;
    [[nodiscard]] double residual() const;
};
ExceptionalProbe exceptional_probe(double q, double b);

/// Constant-slope solutions v_z = (−1 ± √q)/b (sorted). RegimeError if q < 0.
std::vector<double> constant_slopes(double q, double b);

/// y_z on the selected branch. For k = 1 this is the autonomous equation
///   y_z = (y² + y/b − q/(2b²) ± √((q/b³)(q/(4b) − y)))/y;
/// for other k it is y·x_v with x_v from the general reduction (v enters).
/// Throws SingularLine at y = 0 and BeyondDiscriminant past q/(4b).
double branch_rhs(double y, double v, const BranchId& branch, const ReducedParams& p);

/// x_v = dx/dv for x = v_z, general k.
double branch_rhs_v(double x, double v, const BranchId& branch, const ReducedParams& p);

/// F(ζ, w) over ℂ.
std::complex<double> curve_F(std::complex<double> zeta, std::complex<double> w, double q, double b);

/// Root w of F(ζ, w) = 0 on the requested sheet. Throws
/// BranchPointProximity within `bp_tol` (relative) of ζ₂ = q/(4b) and
/// PoleAt for ζ = 0 on the principal sheet.
std::complex<double> curve_eval(std::complex<double> zeta, Sheet sheet, const ReducedParams& p,
                                double bp_tol = 1e-10);

/// Leading term w ≈ coefficient·ζ^power of a sheet at ζ → 0.
struct LeadingTerm {
    double coefficient = 0.0;
    int power = 0;
    [[nodiscard]] double operator()(double zeta) const;
};
/// principal: −q/b² ζ^{−1}; second: (q−1)/q ζ (q ≠ 1) or −2b ζ² (q = 1).
LeadingTerm leading_term_at_zero(Sheet sheet, double q, double b);

/// Double root of F at the branch point ζ₂: w(ζ₂) = (q − 4)/(4b).
double value_at_discriminant(double q, double b);

/// Finite singular/branch points ζ₁ = 0 and ζ₂ = q/(4b) (ζ₃ = ∞ implied).
std::vector<double> finite_branch_points(double q, double b);

struct CurvePoint {
    double zeta = 0.0;
    double w = 0.0;
};

/// ζ = q(1−p²)/(4b), w = (1−p)(q(1+p)²−4)/(4b(p+1)). PoleAt for p = −1.
CurvePoint uniformize(double p_param, const ReducedParams& p);

/// p = √(1 − (4b/q) v_z) ≥ 0. DomainError on a negative radicand.
double p_from_vz(double v_z, const ReducedParams& p);

/// Uniformizing parameter p_c = −sgn(q)·p_from_vz(v_z) for which the
/// relation of a branch is conserved along that branch's trajectories.
double chart_parameter(double v_z, const ReducedParams& p);

/// LHS of the implicit first integral of a branch, such that
///   implicit_relation(p_c(z)) − implicit_relation_slope(q)·z
/// is constant along solutions. RegimeError for q = 0, LogDomain when a
/// logarithm's argument vanishes.
double implicit_relation(double p_param, double q, Sign sign);
double implicit_relation_slope(double q);

enum class GuardLine { y_zero, discriminant, infinity, step_underflow };
std::string to_string(GuardLine g);

struct Trajectory {
    std::vector<double> zs;
    std::vector<double> ys;
    std::vector<double> vs;
    std::optional<GuardLine> terminated_at;
};

struct IntegrateOptions {
    numerics::OdeOptions ode{};
    double guard_rel_tol = 1e-10;  ///< stop at |y − guard| < tol·max(1, |q/(4b)|)
    double y_max = 1e8;            ///< treat |y| beyond this as the line y = ∞
    double v0 = 0.0;
};

/// Integrates y_z = branch_rhs(y, v) from (z0, y0) to z1 and accumulates
/// v = v0 + ∫ y dz. Throws ImmediateSingular when y0 starts on a guard line.
Trajectory integrate_branch(double y0, double z0, double z1, const BranchId& branch,
                            const ReducedParams& p, const IntegrateOptions& options = {});

/// Same integration, reported at n+1 equispaced abscissae from z0 to z1
/// (fewer if a guard stops the run; the stopping point is appended).
Trajectory integrate_branch_sampled(double y0, double z0, double z1, int n, const BranchId& branch,
                                    const ReducedParams& p, const IntegrateOptions& options = {});

}  // namespace bsfb::reduction
