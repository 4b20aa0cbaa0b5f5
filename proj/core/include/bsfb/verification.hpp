#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bsfb/closed_form.hpp"
#include "bsfb/model.hpp"
#include "bsfb/numerics.hpp"
#include "bsfb/reduction.hpp"

namespace bsfb::verification {

struct ZInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// The smooth pieces of a family inside [z_lo, z_hi], each shrunk by `band`
/// at a finite domain end or at z*.
std::vector<ZInterval> family_pieces(const closed_form::SolutionBranch& family, double z_lo,
                                     double z_hi, double band = 1e-3);

struct SweepOptions {
    int n = 400;  ///< samples per piece
    /// Scales d/dz before the residual is formed (1 leaves it alone;
    /// anything else is a deliberate mutation).
    double derivative_scale = 1.0;
    numerics::FdOptions fd{};
};

/// |v_z + q(v_zz − v_z)/(1 − b(v_zz − v_z))²| over the pieces, derivatives
/// by Richardson differences whose stencils stay clear of z*.
ResidualReport ode_residual_sweep(const closed_form::SolutionBranch& family,
                                  const std::vector<ZInterval>& pieces,
                                  const SweepOptions& options = {});

/// PDE residual of the mapped family on the box. Points within `band` of
/// the family's singular line in z are skipped.
ResidualReport pde_residual_sweep(const closed_form::SolutionBranch& family,
                                  const ModelParams& params, const SampleBox& box,
                                  double band = 1e-3);

struct IntegralDrift {
    double drift = 0.0;  ///< max |I(z) − I(z0)|, I = LHS(p_c(z)) − slope·z
    double z_end = 0.0;  ///< where the trajectory ended
    std::optional<reduction::GuardLine> stop;
};

/// Conservation of the implicit relation along an integrated trajectory of
/// the branch (k = 1, σ = 1), up to z1 or the first guard line.
IntegralDrift first_integral_drift(double q, reduction::Sign sign, double y0, double z0, double z1,
                                   double b = 1.0, int samples = 200);

/// max |y(z) − vz_plus(z)| where y integrates the q = 4 minus branch from
/// vz_plus(z0) (c > 0).
double oracle_equivalence_error(double c, double b, double z0, double z1, int samples = 200);

enum class Expect { below, above };

struct Check {
    std::string id;
    std::string description;
    double value = 0.0;
    double threshold = 0.0;
    Expect expect = Expect::below;
    bool pass = false;
    std::string note;
};

struct Report {
    std::vector<Check> checks;
    [[nodiscard]] bool all_pass() const;
    [[nodiscard]] std::size_t failures() const;
};

struct SuiteOptions {
    double abs_c = 1.0;
    double b = 1.0;
    double d = 0.0;
    double sigma = 1.0;
    double ode_tol = 1e-8;
    double pde_tol = 1e-6;
    double coincidence_tol = 1e-9;
    double exceptional_tol = 1e-12;
    double non_solution_floor = 1e-3;
    double integral_tol = 1e-6;
    double oracle_tol = 1e-6;
    double curve_tol = 1e-10;
    double derivative_scale = 1.0;
    std::vector<double> probe_q{3.9, 4.0, 4.1};
};

/// Residual, coincidence, exceptional-solution, first-integral, oracle and
/// curve checks for one parameter set.
Report run_suite(const SuiteOptions& options = {});

}  // namespace bsfb::verification
