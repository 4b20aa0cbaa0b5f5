#include "bsfb/error.hpp"

namespace bsfb {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorKind::LinearModeError: return "LinearModeError";
        case ErrorKind::ParamError: return "ParamError";
        case ErrorKind::RegimeError: return "RegimeError";
        case ErrorKind::LogDomain: return "LogDomain";
        case ErrorKind::SingularLine: return "SingularLine";
        case ErrorKind::BeyondDiscriminant: return "BeyondDiscriminant";
        case ErrorKind::BranchPointProximity: return "BranchPointProximity";
        case ErrorKind::PoleAt: return "PoleAt";
        case ErrorKind::ImmediateSingular: return "ImmediateSingular";
        case ErrorKind::DomainEnd: return "DomainEnd";
        case ErrorKind::DenominatorBreach: return "DenominatorBreach";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::IllPosed: return "IllPosed";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace bsfb
