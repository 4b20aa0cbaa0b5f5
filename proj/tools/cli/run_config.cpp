#include "run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "bsfb/error.hpp"

namespace bsfb::cli {

using nlohmann::json;
namespace cf = closed_form;

namespace {

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorKind::ConfigError, msg); }

// Reads the keys of one JSON object and rejects any it did not ask for.
class Section {
public:
    Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) config_error(where_ + " must be an object");
    }
    ~Section() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.count(key)) config_error("unknown key " + path(key));
        }
    }
    Section(const Section&) = delete;
    Section& operator=(const Section&) = delete;

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? nullptr : &*it;
    }
    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) config_error(path(key) + " must be a number");
            out = v->get<double>();
        }
    }
    void integer(const std::string& key, int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) config_error(path(key) + " must be an integer");
            out = v->get<int>();
        }
    }
    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) config_error(path(key) + " must be true or false");
            out = v->get<bool>();
        }
    }
    std::optional<std::string> string(const std::string& key) {
        const json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) config_error(path(key) + " must be a string");
        return v->get<std::string>();
    }
    [[nodiscard]] std::string path(const std::string& key) const {
        return where_.empty() ? key : where_ + "." + key;
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& msg) {
    if (!ok) config_error(msg);
}

Command command_from(const std::string& s) {
    if (s == "eval") return Command::eval;
    if (s == "verify") return Command::verify;
    if (s == "integrate") return Command::integrate;
    if (s == "pde") return Command::pde;
    if (s == "figure") return Command::figure;
    config_error("unknown command '" + s + "'");
}

Preset preset_from(const std::string& s) {
    if (s == "figure2") return Preset::figure2;
    if (s == "figure3") return Preset::figure3;
    config_error("unknown preset '" + s + "' (figure2 or figure3)");
}

pde::Direction direction_from(const std::string& s) {
    if (s == "automatic") return pde::Direction::automatic;
    if (s == "backward") return pde::Direction::backward;
    if (s == "forward") return pde::Direction::forward;
    config_error("pde.direction must be automatic, backward or forward");
}

void read_model(Section& s, ModelSection& m) {
    s.number("sigma", m.sigma);
    s.number("rho", m.rho);
    s.number("omega", m.omega);
    s.number("k", m.k);
    s.number("q", m.q);
    require(m.sigma > 0.0, "model.sigma must be positive");
    require(m.q != 0.0, "model.q must be nonzero");
}

FamilySelector read_family(const json& j, const std::string& where) {
    Section s(j, where);
    FamilySelector f;
    if (auto name = s.string("family")) {
        const auto fam = cf::family_from_string(*name);
        if (!fam) config_error(where + ".family: unknown family '" + *name + "'");
        f.family = *fam;
    }
    s.number("c", f.c);
    s.number("d", f.d);
    s.integer("root_sign", f.root_sign);
    require(f.root_sign == 1 || f.root_sign == -1, where + ".root_sign must be 1 or -1");
    require(f.family != cf::Family::degenerate_u0,
            where + ": degenerate_u0 takes functions and cannot be configured");
    return f;
}

json family_json(const FamilySelector& f) {
    return {{"family", cf::to_string(f.family)}, {"c", f.c}, {"d", f.d}, {"root_sign", f.root_sign}};
}

bool family_needed(Command c) {
    return c == Command::eval || c == Command::figure || c == Command::pde;
}

}  // namespace

std::string to_string(Command c) {
    switch (c) {
        case Command::eval: return "eval";
        case Command::verify: return "verify";
        case Command::integrate: return "integrate";
        case Command::pde: return "pde";
        case Command::figure: return "figure";
    }
    return "eval";
}

std::string to_string(Preset p) { return p == Preset::figure2 ? "figure2" : "figure3"; }

ModelParams ModelSection::params() const { return ModelParams(sigma, rho, omega, k); }

reduction::ReducedParams ModelSection::reduced() const {
    return reduction::ReducedParams(sigma * sigma / (2.0 * q), rho * omega, k, sigma);
}

json RunConfig::to_json() const {
    json fams = json::array();
    for (const auto& f : families) fams.push_back(family_json(f));
    json sizes = json::array();
    for (int n : pde.sizes) sizes.push_back(n);
    return {
        {"command", cli::to_string(command)},
        {"preset", preset ? json(cli::to_string(*preset)) : json(nullptr)},
        {"model",
         {{"sigma", model.sigma}, {"rho", model.rho}, {"omega", model.omega}, {"k", model.k},
          {"q", model.q}}},
        {"families", fams},
        {"eval",
         {{"surface", eval.surface},
          {"clip_to_domain", eval.clip_to_domain},
          {"z", {{"min", eval.z.min}, {"max", eval.z.max}, {"n", eval.z.n}}},
          {"grid",
           {{"S_min", eval.grid.S_min}, {"S_max", eval.grid.S_max}, {"nS", eval.grid.nS},
            {"t_min", eval.grid.t_min}, {"t_max", eval.grid.t_max}, {"nT", eval.grid.nT},
            {"log_spaced", eval.grid.log_spaced}}}}},
        {"integrate",
         {{"y0", integrate.y0}, {"z0", integrate.z0}, {"z1", integrate.z1}, {"n", integrate.n},
          {"branch", reduction::to_string(integrate.branch)}, {"v0", integrate.v0}}},
        {"pde",
         {{"mode", pde.validation ? "validation" : "free_run"}, {"S_min", pde.S_min},
          {"S_max", pde.S_max}, {"t_start", pde.t_start}, {"t_end", pde.t_end},
          {"sizes", sizes}, {"nT", pde.nT}, {"theta", pde.theta},
          {"direction", pde::to_string(pde.direction)}}},
        {"verify", {{"abs_c", verify.abs_c}, {"derivative_scale", verify.derivative_scale}}},
        {"tol",
         {{"ode", tol.ode}, {"pde", tol.pde}, {"coincidence", tol.coincidence},
          {"exceptional", tol.exceptional}, {"non_solution", tol.non_solution},
          {"integral", tol.integral}, {"oracle", tol.oracle}, {"curve", tol.curve},
          {"newton", tol.newton}, {"min_order", tol.min_order}}},
        {"out", out ? json(*out) : json(nullptr)},
    };
}

std::string RunConfig::canonical() const { return to_json().dump(2) + "\n"; }

RunConfig parse_config(const json& j) {
    RunConfig cfg;
    Section root(j, "");
    if (auto cmd = root.string("command")) cfg.command = command_from(*cmd);
    if (auto p = root.string("preset")) cfg.preset = preset_from(*p);
    if (const json* m = root.find("model")) {
        Section s(*m, "model");
        read_model(s, cfg.model);
    }
    if (const json* fams = root.find("families")) {
        require(fams->is_array() && !fams->empty(), "families must be a nonempty array");
        cfg.families.clear();
        for (std::size_t i = 0; i < fams->size(); ++i) {
            cfg.families.push_back(read_family((*fams)[i], "families[" + std::to_string(i) + "]"));
        }
    }
    if (const json* e = root.find("eval")) {
        Section s(*e, "eval");
        s.boolean("surface", cfg.eval.surface);
        s.boolean("clip_to_domain", cfg.eval.clip_to_domain);
        if (const json* z = s.find("z")) {
            Section zs(*z, "eval.z");
            zs.number("min", cfg.eval.z.min);
            zs.number("max", cfg.eval.z.max);
            zs.integer("n", cfg.eval.z.n);
        }
        if (const json* g = s.find("grid")) {
            Section gs(*g, "eval.grid");
            auto& r = cfg.eval.grid;
            gs.number("S_min", r.S_min);
            gs.number("S_max", r.S_max);
            gs.integer("nS", r.nS);
            gs.number("t_min", r.t_min);
            gs.number("t_max", r.t_max);
            gs.integer("nT", r.nT);
            gs.boolean("log_spaced", r.log_spaced);
        }
    }
    if (const json* i = root.find("integrate")) {
        Section s(*i, "integrate");
        auto& r = cfg.integrate;
        s.number("y0", r.y0);
        s.number("z0", r.z0);
        s.number("z1", r.z1);
        s.integer("n", r.n);
        s.number("v0", r.v0);
        if (auto b = s.string("branch")) {
            if (*b == "minus") r.branch = reduction::Sign::minus;
            else if (*b == "plus") r.branch = reduction::Sign::plus;
            else config_error("integrate.branch must be minus or plus");
        }
    }
    if (const json* p = root.find("pde")) {
        Section s(*p, "pde");
        auto& r = cfg.pde;
        if (auto mode = s.string("mode")) {
            if (*mode == "validation") r.validation = true;
            else if (*mode == "free_run") r.validation = false;
            else config_error("pde.mode must be validation or free_run");
        }
        s.number("S_min", r.S_min);
        s.number("S_max", r.S_max);
        s.number("t_start", r.t_start);
        s.number("t_end", r.t_end);
        s.integer("nT", r.nT);
        s.number("theta", r.theta);
        if (auto d = s.string("direction")) r.direction = direction_from(*d);
        if (const json* sizes = s.find("sizes")) {
            require(sizes->is_array() && !sizes->empty(), "pde.sizes must be a nonempty array");
            r.sizes.clear();
            for (const auto& n : *sizes) {
                require(n.is_number_integer(), "pde.sizes entries must be integers");
                r.sizes.push_back(n.get<int>());
            }
        }
    }
    if (const json* v = root.find("verify")) {
        Section s(*v, "verify");
        s.number("abs_c", cfg.verify.abs_c);
        s.number("derivative_scale", cfg.verify.derivative_scale);
    }
    if (const json* t = root.find("tol")) {
        Section s(*t, "tol");
        auto& r = cfg.tol;
        s.number("ode", r.ode);
        s.number("pde", r.pde);
        s.number("coincidence", r.coincidence);
        s.number("exceptional", r.exceptional);
        s.number("non_solution", r.non_solution);
        s.number("integral", r.integral);
        s.number("oracle", r.oracle);
        s.number("curve", r.curve);
        s.number("newton", r.newton);
        s.number("min_order", r.min_order);
        for (double x : {r.ode, r.pde, r.coincidence, r.exceptional, r.non_solution, r.integral,
                         r.oracle, r.curve, r.newton}) {
            require(x > 0.0, "tolerances must be positive");
        }
    }
    if (auto o = root.string("out")) cfg.out = *o;

    const auto& e = cfg.eval;
    require(e.z.n >= 1 && e.z.max >= e.z.min, "eval.z needs n >= 1 and max >= min");
    require(e.grid.nS >= 1 && e.grid.nT >= 1, "eval.grid needs nS, nT >= 1");
    require(e.grid.S_min > 0.0 && e.grid.S_max >= e.grid.S_min, "eval.grid needs 0 < S_min <= S_max");
    require(e.grid.t_max >= e.grid.t_min, "eval.grid needs t_max >= t_min");
    require(cfg.integrate.n >= 1 && cfg.integrate.z1 != cfg.integrate.z0,
            "integrate needs n >= 1 and z1 != z0");
    const auto& p = cfg.pde;
    require(p.S_min > 0.0 && p.S_max > p.S_min, "pde needs 0 < S_min < S_max");
    require(p.t_end > p.t_start, "pde needs t_end > t_start");
    require(p.theta >= 0.0 && p.theta <= 1.0, "pde.theta must lie in [0, 1]");
    require(p.nT == 0 || p.nT >= 16, "pde.nT must be 0 (same as nS) or at least 16");
    for (int n : p.sizes) require(n >= 16, "pde.sizes entries must be at least 16");
    require(cfg.verify.abs_c > 0.0, "verify.abs_c must be positive");

    if (family_needed(cfg.command)) {
        const double b = cfg.model.rho * cfg.model.omega;
        for (const auto& f : cfg.families) {
            cf::SolutionBranch br;
            br.family = f.family;
            br.c = f.c;
            br.d = f.d;
            br.b = b;
            br.q = cfg.model.q;
            br.root_sign = f.root_sign;
            try {
                br.validate();
            } catch (const Error& err) {
                config_error(cf::to_string(f.family) + ": " + err.what());
            }
        }
    }
    return cfg;
}

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        config_error(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) config_error("override must look like key.path=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    std::string pointer = "/";
    for (char ch : key) pointer += ch == '.' ? '/' : ch;
    try {
        doc[json::json_pointer(pointer)] = value;
    } catch (const json::exception& e) {
        config_error("cannot apply override " + key + ": " + e.what());
    }
}

RunConfig preset_config(Preset p) {
    RunConfig cfg;
    cfg.command = Command::figure;
    cfg.preset = p;
    cfg.model = ModelSection{};
    cfg.eval.clip_to_domain = true;
    const double abs_c = p == Preset::figure2 ? 1.0 : 0.5;
    cfg.families.clear();
    for (auto f : {cf::Family::euler_plus, cf::Family::trig1, cf::Family::trig2, cf::Family::three_piece}) {
        cfg.families.push_back({f, f == cf::Family::euler_plus ? abs_c : -abs_c, 0.0, 1});
    }
    if (p == Preset::figure2) {
        cfg.eval.surface = false;
        cfg.eval.z = {-5.0, 4.5, 951};
    } else {
        cfg.eval.surface = true;
        cfg.eval.grid = {0.09, 8.91, 99, 0.0, 2.0, 21, false};
    }
    return cfg;
}

bool set_primary_tolerance(RunConfig& cfg, double tol) {
    if (!(tol > 0.0)) config_error("--tol must be positive");
    switch (cfg.command) {
        case Command::verify: cfg.tol.ode = tol; return true;
        case Command::integrate: cfg.tol.integral = tol; return true;
        case Command::pde: cfg.tol.newton = tol; return true;
        default: return false;
    }
}

}  // namespace bsfb::cli
