#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "bsfb/error.hpp"
#include "run_config.hpp"

namespace bsfb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitVerification = 3;
inline constexpr int kExitGuard = 4;

/// Exit code for a library error: 2 for bad input, 4 for a numerical guard.
int exit_code_for(ErrorKind kind);

struct Outcome {
    int exit_code = kExitOk;
    nlohmann::json report;  ///< see docs/report-schema.md
};

/// Writes the command's primary output (CSV, or the JSON report for
/// verify) to `out` and a short human summary to `log`. Library errors
/// are caught and turned into an exit code and an "error" entry.
Outcome run(const RunConfig& cfg, std::ostream& out, std::ostream& log);

/// %.17g
std::string format_number(double x);

}  // namespace bsfb::cli
