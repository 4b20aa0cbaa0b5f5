#pragma once

#include <functional>
#include <limits>
#include <string>

#include "bsfb/numerics.hpp"

namespace bsfb {

/// Coefficients of the feedback-effect equation
///   u_t + (σ²S²/2) u_SS / (1 − ρ S λ(S) u_SS)² = 0,  λ(S) = ω S^k.
///
/// Only σ, ρ, ω, k are stored; the feedback constant b = ρω is recomputed
/// on every access so it cannot drift out of sync.
class ModelParams {
public:
    /// Throws DomainError unless sigma > 0.
    ModelParams(double sigma, double rho, double omega, double k);

    /// Convenience for callers that only care about b: ρ = b, ω = 1.
    static ModelParams with_feedback(double sigma, double b, double k);

    [[nodiscard]] double sigma() const noexcept { return sigma_; }
    [[nodiscard]] double rho() const noexcept { return rho_; }
    [[nodiscard]] double omega() const noexcept { return omega_; }
    [[nodiscard]] double k() const noexcept { return k_; }
    [[nodiscard]] double b() const noexcept { return rho_ * omega_; }
    [[nodiscard]] bool linear_mode() const noexcept { return b() == 0.0; }

    /// ρ outside (0,1) is accepted; callers may surface this as a warning.
    [[nodiscard]] bool rho_in_usual_range() const noexcept { return rho_ > 0.0 && rho_ < 1.0; }

    /// λ(S) = ω S^k
    [[nodiscard]] double lambda(double S) const;

private:
    double sigma_;
    double rho_;
    double omega_;
    double k_;
};

/// A point of the second-order jet space restricted to what the residual
/// needs (u_St and u_tt never enter).
struct PointState {
    double S = 1.0;
    double t = 0.0;
    double u = 0.0;
    double uS = 0.0;
    double ut = 0.0;
    double uSS = 0.0;
};

struct ResidualReport {
    double max_abs = 0.0;
    double l2 = 0.0;  ///< root-mean-square
    std::size_t n_samples = 0;
    std::size_t skipped = 0;
    std::string domain_note;

    void add(double residual);
    void skip() { ++skipped; }
    /// Finalizes the RMS; call once after the last add().
    void finish();
    void merge(const ResidualReport& other);

private:
    double sum_sq_ = 0.0;
};

/// Denominator guard, relative to max(1, |b S^{k+1} u_SS|).
inline constexpr double kDenominatorTol = 1e-8;

/// b S^{k+1} u_SS at the state.
double feedback_term(const PointState& state, const ModelParams& params);

/// Δ = u_t + (σ²S²/2) u_SS/(1 − b S^{k+1} u_SS)². With b = 0 this is the
/// linear Black–Scholes operator u_t + (σ²S²/2) u_SS.
///
/// Throws DomainError for S ≤ 0 and DegenerateDenominator when the
/// denominator is within `den_tol` of zero.
double pde_residual(const PointState& state, const ModelParams& params,
                    double den_tol = kDenominatorTol);

/// Member of the family on which 1 − b S^{k+1} u_SS vanishes identically:
///   k ∉ {0,1}: S^{1−k}/(b k (k−1)) + S c1(t) + c2(t)
///   k = 1:    −log(S)/b           + S c1(t) + c2(t)
///   k = 0:     S log(S)/b         + S c1(t) + c2(t)
/// Throws LinearModeError when b = 0 and DomainError for S ≤ 0.
double u0_family(double S, double t, const std::function<double(double)>& c1,
                 const std::function<double(double)>& c2, const ModelParams& params);

/// Analytic ∂²u0/∂S² (independent of c1, c2); equals 1/(b S^{k+1}).
double u0_family_uSS(double S, const ModelParams& params);

/// u(S, t) evaluated in extended precision for finite-difference sweeps.
using Surface = std::function<long double(long double S, long double t)>;

/// Rectangular (S, t) sample box for residual sweeps.
struct SampleBox {
    double S_min = 0.5;
    double S_max = 2.0;
    double t_min = 0.0;
    double t_max = 1.0;
    int nS = 50;
    int nT = 20;
    bool log_spaced = true;
};

/// Returns the jet (u, u_S, u_t, u_SS) of a surface by Richardson central
/// differences. The S derivatives are taken in x = log S and converted, so
/// `fd_logS` steps are relative in S.
PointState surface_jet(const Surface& u, double S, double t, const numerics::FdOptions& fd_logS,
                       const numerics::FdOptions& fd_t);

/// Largest admissible FD steps at a point, in log S and in t.
struct StepLimits {
    double log_S = std::numeric_limits<double>::infinity();
    double t = std::numeric_limits<double>::infinity();
};

/// Per-point step limits, used to keep stencils inside a family's domain.
using StepCap = std::function<StepLimits(double S, double t)>;

/// Samples |pde_residual| of `u` over the box. Points where the denominator
/// guard trips, or where `valid` rejects the point, are counted as skipped.
ResidualReport sample_pde_residual(const Surface& u, const ModelParams& params,
                                   const SampleBox& box,
                                   const std::function<bool(double, double)>& valid = {},
                                   const StepCap& step_cap = {});

}  // namespace bsfb
