#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "bsfb/closed_form.hpp"
#include "bsfb/pde_solver.hpp"
#include "bsfb/reduction.hpp"
#include "bsfb/verification.hpp"

namespace bsfb::cli {

using nlohmann::json;
namespace cf = closed_form;
namespace rd = reduction;

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ConfigError:
        case ErrorKind::ParamError:
        case ErrorKind::DomainError:
        case ErrorKind::DomainEnd:
        case ErrorKind::RegimeError:
        case ErrorKind::LinearModeError: return kExitConfig;
        default: return kExitGuard;
    }
}

namespace {

// JSON numbers cannot carry inf or nan.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}
    void header(std::initializer_list<const char*> cols) {
        bool first = true;
        for (const char* c : cols) {
            out_ << (first ? "" : ",") << c;
            first = false;
        }
        out_ << '\n';
    }
    CsvWriter& field(const std::string& s) {
        out_ << (first_ ? "" : ",") << s;
        first_ = false;
        return *this;
    }
    CsvWriter& field(double x) { return field(format_number(x)); }
    CsvWriter& field(int x) { return field(std::to_string(x)); }
    void end() {
        out_ << '\n';
        first_ = true;
        ++rows_;
    }
    [[nodiscard]] std::size_t rows() const { return rows_; }

private:
    std::ostream& out_;
    bool first_ = true;
    std::size_t rows_ = 0;
};

cf::SolutionBranch branch_of(const FamilySelector& f, const RunConfig& cfg) {
    cf::SolutionBranch br;
    br.family = f.family;
    br.c = f.c;
    br.d = f.d;
    br.b = cfg.model.rho * cfg.model.omega;
    br.q = cfg.model.q;
    br.root_sign = f.root_sign;
    return br;
}

double lerp_sample(double lo, double hi, int i, int n) {
    return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

double surface_S(const SurfaceRange& g, int i) {
    if (!g.log_spaced) return lerp_sample(g.S_min, g.S_max, i, g.nS);
    return std::exp(lerp_sample(std::log(g.S_min), std::log(g.S_max), i, g.nS));
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, json& report) {
    CsvWriter csv(out);
    std::size_t skipped = 0;
    json per_family = json::array();
    const ModelParams params = cfg.model.params();
    if (!cfg.eval.surface) {
        csv.header({"family", "z", "v"});
        for (const auto& f : cfg.families) {
            const auto br = branch_of(f, cfg);
            const std::string name = cf::to_string(f.family);
            const std::size_t before = csv.rows();
            for (int i = 0; i < cfg.eval.z.n; ++i) {
                const double z = lerp_sample(cfg.eval.z.min, cfg.eval.z.max, i, cfg.eval.z.n);
                if (cfg.eval.clip_to_domain && !cf::in_domain(br, z)) {
                    ++skipped;
                    continue;
                }
                csv.field(name).field(z).field(cf::evaluate_v(br, z)).end();
            }
            per_family.push_back({{"family", name}, {"rows", csv.rows() - before}});
        }
    } else {
        csv.header({"family", "S", "t", "u"});
        const auto& g = cfg.eval.grid;
        for (const auto& f : cfg.families) {
            const auto br = branch_of(f, cfg);
            const std::string name = cf::to_string(f.family);
            const double a = cf::invariant_speed(br, params);
            const std::size_t before = csv.rows();
            for (int n = 0; n < g.nT; ++n) {
                const double t = lerp_sample(g.t_min, g.t_max, n, g.nT);
                for (int i = 0; i < g.nS; ++i) {
                    const double S = surface_S(g, i);
                    if (cfg.eval.clip_to_domain && !cf::in_domain(br, std::log(S) + a * t)) {
                        ++skipped;
                        continue;
                    }
                    csv.field(name).field(S).field(t).field(cf::u_family(br, params, S, t)).end();
                }
            }
            per_family.push_back({{"family", name}, {"rows", csv.rows() - before}});
        }
    }
    report["rows"] = csv.rows();
    report["skipped"] = skipped;
    report["families"] = per_family;
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& log, json& report) {
    verification::SuiteOptions o;
    o.abs_c = cfg.verify.abs_c;
    o.b = cfg.model.rho * cfg.model.omega;
    o.sigma = cfg.model.sigma;
    o.derivative_scale = cfg.verify.derivative_scale;
    o.ode_tol = cfg.tol.ode;
    o.pde_tol = cfg.tol.pde;
    o.coincidence_tol = cfg.tol.coincidence;
    o.exceptional_tol = cfg.tol.exceptional;
    o.non_solution_floor = cfg.tol.non_solution;
    o.integral_tol = cfg.tol.integral;
    o.oracle_tol = cfg.tol.oracle;
    o.curve_tol = cfg.tol.curve;
    const auto r = verification::run_suite(o);

    json checks = json::array();
    for (const auto& c : r.checks) {
        checks.push_back({{"id", c.id},
                          {"description", c.description},
                          {"value", num(c.value)},
                          {"threshold", c.threshold},
                          {"expect", c.expect == verification::Expect::below ? "below" : "above"},
                          {"pass", c.pass},
                          {"note", c.note}});
        char line[160];
        std::snprintf(line, sizeof line, "%s %-34s %.3e (%s %.1e)\n", c.pass ? "PASS" : "FAIL",
                      c.id.c_str(), c.value,
                      c.expect == verification::Expect::below ? "<" : ">", c.threshold);
        log << line;
    }
    report["checks"] = checks;
    report["passed"] = r.checks.size() - r.failures();
    report["failed"] = r.failures();
    const int code = r.all_pass() ? kExitOk : kExitVerification;
    report["exit_code"] = code;
    report["status"] = code == kExitOk ? "ok" : "verification_failure";
    out << report.dump(2) << '\n';
    return code;
}

int cmd_integrate(const RunConfig& cfg, std::ostream& out, json& report) {
    const auto p = cfg.model.reduced();
    const auto& in = cfg.integrate;
    const auto branch = rd::BranchId::make(in.branch, p.q());
    rd::IntegrateOptions opt;
    opt.v0 = in.v0;
    const auto tr = rd::integrate_branch_sampled(in.y0, in.z0, in.z1, in.n, branch, p, opt);

    // The first integral only exists for the autonomous k = 1 equation.
    const bool has_integral = p.k() == 1.0;
    const double slope = has_integral ? rd::implicit_relation_slope(p.q()) : 0.0;
    auto invariant = [&](std::size_t i) {
        return rd::implicit_relation(rd::chart_parameter(tr.ys[i], p), p.q(), in.branch) -
               slope * tr.zs[i];
    };
    const double ref = has_integral ? invariant(0) : 0.0;

    CsvWriter csv(out);
    csv.header({"z", "y", "v", "drift"});
    double max_drift = 0.0;
    for (std::size_t i = 0; i < tr.zs.size(); ++i) {
        double drift = std::nan("");
        const bool at_guard = tr.terminated_at && i + 1 == tr.zs.size();
        if (has_integral && !at_guard) {
            drift = invariant(i) - ref;
            max_drift = std::max(max_drift, std::fabs(drift));
        }
        csv.field(tr.zs[i]).field(tr.ys[i]).field(tr.vs[i]).field(drift).end();
    }
    report["samples"] = tr.zs.size();
    report["z_end"] = tr.zs.back();
    report["terminated_at"] = tr.terminated_at ? json(rd::to_string(*tr.terminated_at)) : json(nullptr);
    report["max_drift"] = has_integral ? num(max_drift) : json(nullptr);
    report["drift_tolerance"] = cfg.tol.integral;
    if (tr.terminated_at) return kExitGuard;
    if (has_integral && !(max_drift < cfg.tol.integral)) return kExitVerification;
    return kExitOk;
}

int cmd_pde(const RunConfig& cfg, std::ostream& out, json& report) {
    const ModelParams params = cfg.model.params();
    const auto br = branch_of(cfg.families.front(), cfg);
    pde::SolverOptions opt;
    opt.theta = cfg.pde.theta;
    opt.newton_tol = cfg.tol.newton;
    opt.direction = cfg.pde.direction;
    auto spec_for = [&](int nS) {
        GridSpec g;
        g.S_min = cfg.pde.S_min;
        g.S_max = cfg.pde.S_max;
        g.nS = nS;
        g.nT = cfg.pde.nT > 0 ? cfg.pde.nT : nS;
        g.t_start = cfg.pde.t_start;
        g.t_end = cfg.pde.t_end;
        return g;
    };
    CsvWriter csv(out);
    report["family"] = cf::to_string(br.family);

    if (!cfg.pde.validation) {
        opt.boundary = pde::BoundaryMode::free_run;
        const GridSpec g = spec_for(cfg.pde.sizes.front());
        const pde::Data data = [&](double S, double t) { return cf::u_family(br, params, S, t); };
        const auto sol = pde::solve(data, g, params, opt);
        csv.header({"S", "t", "u"});
        for (int n = 0; n <= g.nT; ++n) {
            for (int i = 0; i < g.nS; ++i) csv.field(g.S(i)).field(g.t(n)).field(sol.field.at(n, i)).end();
        }
        report["mode"] = "free_run";
        report["direction"] = pde::to_string(sol.direction);
        report["fallback_steps"] = sol.fallback_steps;
        return kExitOk;
    }

    std::vector<GridSpec> specs;
    for (int n : cfg.pde.sizes) specs.push_back(spec_for(n));
    const auto rep = pde::convergence_study(br, params, specs, opt);
    csv.header({"nS", "nT", "dx", "dt", "max_error", "order"});
    json rows = json::array();
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        const double order = i == 0 ? std::nan("") : rep.orders[i - 1];
        csv.field(r.nS).field(r.nT).field(r.dx).field(r.dt).field(r.max_error).field(order).end();
        rows.push_back({{"nS", r.nS}, {"nT", r.nT}, {"dx", r.dx}, {"dt", r.dt},
                        {"max_error", num(r.max_error)}, {"order", num(order)}});
    }
    report["mode"] = "validation";
    report["direction"] = pde::to_string(rep.direction);
    report["rows"] = rows;
    report["fitted_order"] = num(rep.fitted_order);
    report["monotone"] = rep.monotone();
    report["min_order"] = cfg.tol.min_order;

    // An exact discrete solution has nothing left to converge.
    const bool exact = rep.rows.back().max_error < 1e-12;
    const bool ok = exact || (rep.monotone() && rep.fitted_order >= cfg.tol.min_order);
    return ok ? kExitOk : kExitVerification;
}

const char* status_for(int code) {
    switch (code) {
        case kExitOk: return "ok";
        case kExitConfig: return "config_error";
        case kExitVerification: return "verification_failure";
        default: return "guard_stop";
    }
}

}  // namespace

Outcome run(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    Outcome o;
    o.report = {{"command", to_string(cfg.command)}, {"config", cfg.to_json()}};
    try {
        switch (cfg.command) {
            case Command::eval:
            case Command::figure: o.exit_code = cmd_eval(cfg, out, o.report); break;
            case Command::verify: o.exit_code = cmd_verify(cfg, out, log, o.report); break;
            case Command::integrate: o.exit_code = cmd_integrate(cfg, out, o.report); break;
            case Command::pde: o.exit_code = cmd_pde(cfg, out, o.report); break;
        }
    } catch (const Error& e) {
        o.exit_code = exit_code_for(e.kind());
        o.report["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
        log << "error: " << e.what() << '\n';
    }
    o.report["exit_code"] = o.exit_code;
    o.report["status"] = status_for(o.exit_code);
    return o;
}

}  // namespace bsfb::cli
