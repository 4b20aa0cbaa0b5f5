#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bsfb/closed_form.hpp"
#include "bsfb/grid.hpp"
#include "bsfb/model.hpp"

namespace bsfb::pde {

enum class Direction { automatic, backward, forward };
enum class BoundaryMode { dirichlet, free_run };

std::string to_string(Direction d);

struct SolverOptions {
    Direction direction = Direction::automatic;
    BoundaryMode boundary = BoundaryMode::dirichlet;
    double theta = 0.5;  ///< 0.5 is Crank–Nicolson, 1 is fully implicit
    int max_newton = 50;
    double newton_tol = 1e-10;
    bool explicit_fallback = true;
    double den_tol = kDenominatorTol;
};

/// Reference data u(S, t). In Dirichlet mode it supplies the start slice
/// and both boundary columns; in free-run mode only the start slice.
using Data = std::function<double(double S, double t)>;

/// Boundary values on the new level for Dirichlet mode.
struct Boundary {
    double left = 0.0;
    double right = 0.0;
};

/// Effective-diffusion indicator (1 + X)/(1 − X)³ with X = b S^{k+1} u_SS at
/// the interior nodes of a slice. Positive where marching backward in t is
/// well posed, negative where marching forward is.
std::vector<double> diffusion_sign(const std::vector<double>& slice, const GridSpec& grid,
                                   const ModelParams& params);

/// The well-posed direction for a slice. IllPosed on mixed signs or when
/// the slice touches X = ±1.
Direction choose_direction(const std::vector<double>& slice, const GridSpec& grid,
                           const ModelParams& params);

/// One θ-scheme step from t_from to t_to (either order) on the log-S grid.
/// Nodes where the denominator 1 − X vanishes or changes sign raise
/// DenominatorBreach; Newton failure falls back to explicit sub-steps and
/// raises NonConvergence if that fails too.
std::vector<double> step(const std::vector<double>& slice, double t_from, double t_to,
                         const GridSpec& grid, const ModelParams& params, const Boundary& bc,
                         const SolverOptions& options = {});

/// step() from t to t − dt.
std::vector<double> step_backward(const std::vector<double>& slice, double t, double dt,
                                  const GridSpec& grid, const ModelParams& params,
                                  const Boundary& bc, const SolverOptions& options = {});

struct Solution {
    Field field;
    Direction direction = Direction::backward;
    int fallback_steps = 0;
};

/// Marches over the whole grid, starting at t_end (backward) or t_start
/// (forward). The grid must be log-spaced.
Solution solve(const Data& data, const GridSpec& grid, const ModelParams& params,
               const SolverOptions& options = {});

struct ConvergenceRow {
    int nS = 0;
    int nT = 0;
    double dx = 0.0;
    double dt = 0.0;
    double max_error = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::vector<double> orders;  ///< log2-type ratio between consecutive rows
    double fitted_order = 0.0;   ///< least-squares slope of log error against log dx
    Direction direction = Direction::backward;
    [[nodiscard]] bool monotone() const;
};

/// Runs the solver with Dirichlet data from the exact family on each grid
/// and reports max nodal errors.
ConvergenceReport convergence_study(const closed_form::SolutionBranch& family,
                                    const ModelParams& params, const std::vector<GridSpec>& specs,
                                    const SolverOptions& options = {});

}  // namespace bsfb::pde
