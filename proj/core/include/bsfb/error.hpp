#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bsfb {

/// Failure categories raised by the library. Each maps onto one named
/// error condition of the public operations.
enum class ErrorKind {
    DomainError,
    DegenerateDenominator,
    LinearModeError,
    ParamError,
    RegimeError,
    LogDomain,
    SingularLine,
    BeyondDiscriminant,
    BranchPointProximity,
    PoleAt,
    ImmediateSingular,
    DomainEnd,
    DenominatorBreach,
    NonConvergence,
    IllPosed,
    ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace bsfb
