#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/run_config.hpp"

namespace {

using namespace bsfb;
using nlohmann::json;

bool write_file(const std::string& path, const std::string& data) {
    std::ofstream f(path, std::ios::binary);
    f << data;
    return static_cast<bool>(f);
}

cli::RunConfig build_config(const std::string& command, const std::string& config_path,
                            const std::string& preset, const std::vector<std::string>& overrides) {
    json doc = json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) fail(ErrorKind::ConfigError, "cannot read config file " + config_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        try {
            doc = json::parse(ss.str());
        } catch (const json::parse_error& e) {
            fail(ErrorKind::ConfigError, std::string("malformed JSON: ") + e.what());
        }
    }
    if (!doc.is_object()) fail(ErrorKind::ConfigError, "config must be a JSON object");
    doc["command"] = command;
    if (!preset.empty()) doc["preset"] = preset;
    for (const auto& o : overrides) cli::apply_override(doc, o);

    cli::RunConfig cfg = cli::parse_config(doc);
    if (cfg.preset) {
        if (cfg.command != cli::Command::figure) {
            fail(ErrorKind::ConfigError, "--preset only applies to the figure command");
        }
        auto out = cfg.out;
        cfg = cli::preset_config(*cfg.preset);
        cfg.out = out;
    } else if (cfg.command == cli::Command::figure) {
        cfg.eval.clip_to_domain = true;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact solutions and numerical checks for the feedback-effect Black-Scholes model"};
    std::string command, config_path, out_path, preset, report_path;
    std::vector<std::string> overrides;
    double tol = 0.0;
    bool print_config = false;

    app.add_option("command", command, "eval | verify | integrate | pde | figure")
        ->required()
        ->check(CLI::IsMember({"eval", "verify", "integrate", "pde", "figure"}));
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_path, "output file (default: stdout)");
    auto* tol_opt = app.add_option("--tol", tol, "primary tolerance of the command");
    app.add_option("--preset", preset, "figure preset")->check(CLI::IsMember({"figure2", "figure3"}));
    app.add_option("--set", overrides, "override a config value, e.g. --set tol.ode=1e-9");
    app.add_option("--report", report_path, "also write the JSON report here");
    app.add_flag("--print-config", print_config, "print the canonical config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitConfig;
    }
    if (config_path.empty() && !(command == "figure" && !preset.empty())) {
        std::cerr << "error: --config is required (figure accepts --preset instead)\n";
        return cli::kExitConfig;
    }

    cli::RunConfig cfg;
    try {
        cfg = build_config(command, config_path, preset, overrides);
        if (!out_path.empty()) cfg.out = out_path;
        if (*tol_opt && !cli::set_primary_tolerance(cfg, tol)) {
            std::cerr << "note: " << command << " has no tolerance; --tol ignored\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::exit_code_for(e.kind());
    }
    if (print_config) {
        std::cout << cfg.canonical();
        return cli::kExitOk;
    }

    std::ostringstream body;
    const auto outcome = cli::run(cfg, body, std::cerr);
    std::string data = body.str();
    if (outcome.report.contains("error")) {
        // Partial CSV is withheld; verify still emits its report.
        data = cfg.command == cli::Command::verify ? outcome.report.dump(2) + "\n" : std::string{};
    }
    if (!data.empty()) {
        if (cfg.out) {
            if (!write_file(*cfg.out, data)) {
                std::cerr << "error: cannot write " << *cfg.out << '\n';
                return cli::kExitConfig;
            }
        } else {
            std::cout << data;
        }
    }
    if (!report_path.empty() && !write_file(report_path, outcome.report.dump(2) + "\n")) {
        std::cerr << "error: cannot write " << report_path << '\n';
        return cli::kExitConfig;
    }
    return outcome.exit_code;
}
