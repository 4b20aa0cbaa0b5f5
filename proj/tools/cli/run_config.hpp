#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsfb/closed_form.hpp"
#include "bsfb/model.hpp"
#include "bsfb/pde_solver.hpp"
#include "bsfb/reduction.hpp"

namespace bsfb::cli {

enum class Command { eval, verify, integrate, pde, figure };
enum class Preset { figure2, figure3 };

std::string to_string(Command c);
std::string to_string(Preset p);

struct ModelSection {
    double sigma = 1.0;
    double rho = 1.0;
    double omega = 1.0;
    double k = 1.0;
    double q = 4.0;  ///< fixes a = σ²/(2q)

    [[nodiscard]] ModelParams params() const;
    [[nodiscard]] reduction::ReducedParams reduced() const;
};

struct FamilySelector {
    closed_form::Family family = closed_form::Family::euler_plus;
    double c = 1.0;
    double d = 0.0;
    int root_sign = 1;
};

struct ZRange {
    double min = -5.0;
    double max = 4.5;
    int n = 951;
};

struct SurfaceRange {
    double S_min = 0.5;
    double S_max = 2.0;
    int nS = 50;
    double t_min = 0.0;
    double t_max = 1.0;
    int nT = 20;
    bool log_spaced = false;
};

struct EvalSection {
    bool surface = false;  ///< false: (z, v) rows; true: (S, t, u) rows
    bool clip_to_domain = false;
    ZRange z;
    SurfaceRange grid;
};

struct IntegrateSection {
    double y0 = 0.1;
    double z0 = 0.0;
    double z1 = 1.0;
    int n = 200;
    reduction::Sign branch = reduction::Sign::minus;
    double v0 = 0.0;
};

struct PdeSection {
    bool validation = true;  ///< false: free run from the family's start slice
    double S_min = 0.36787944117144233;
    double S_max = 2.7182818284590451;
    double t_start = 0.0;
    double t_end = 1.0;
    std::vector<int> sizes{64, 128, 256};
    int nT = 0;  ///< 0 means nT = nS
    double theta = 0.5;
    pde::Direction direction = pde::Direction::automatic;
};

struct VerifySection {
    double abs_c = 1.0;
    double derivative_scale = 1.0;
};

struct Tolerances {
    double ode = 1e-8;
    double pde = 1e-6;
    double coincidence = 1e-9;
    double exceptional = 1e-12;
    double non_solution = 1e-3;
    double integral = 1e-6;
    double oracle = 1e-6;
    double curve = 1e-10;
    double newton = 1e-10;
    double min_order = 1.8;
};

struct RunConfig {
    Command command = Command::eval;
    std::optional<Preset> preset;
    ModelSection model;
    std::vector<FamilySelector> families{FamilySelector{}};
    EvalSection eval;
    IntegrateSection integrate;
    PdeSection pde;
    VerifySection verify;
    Tolerances tol;
    std::optional<std::string> out;

    /// Every field with its value, keys sorted.
    [[nodiscard]] nlohmann::json to_json() const;
    /// Pretty-printed to_json(), newline terminated.
    [[nodiscard]] std::string canonical() const;
};

/// Missing keys keep their defaults; unknown keys, wrong types and invalid
/// values raise ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Applies `path=value` (dotted path, JSON literal or bare string) to a raw
/// config document before parsing.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// The figure presets as complete configs.
RunConfig preset_config(Preset p);

/// Replaces the primary tolerance of the command (ode for verify, integral
/// for integrate, newton for pde). Returns false when the command has none.
bool set_primary_tolerance(RunConfig& cfg, double tol);

}  // namespace bsfb::cli
