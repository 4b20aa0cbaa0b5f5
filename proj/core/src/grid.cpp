#include "bsfb/grid.hpp"

#include <cmath>

#include "bsfb/error.hpp"

namespace bsfb {

void GridSpec::validate() const {
    if (!(S_min > 0.0) || !(S_max > S_min)) {
        fail(ErrorKind::DomainError, "grid requires 0 < S_min < S_max");
    }
    if (nS < 16 || nT < 16) fail(ErrorKind::DomainError, "grid requires nS >= 16 and nT >= 16");
    if (!(t_end > t_start)) fail(ErrorKind::DomainError, "grid requires t_end > t_start");
}

double GridSpec::S(int i) const {
    if (log_space) return std::exp(std::log(S_min) + dx() * i);
    return S_min + dx() * i;
}

double GridSpec::t(int n) const { return t_start + dt() * n; }

double GridSpec::dx() const {
    if (log_space) return (std::log(S_max) - std::log(S_min)) / (nS - 1);
    return (S_max - S_min) / (nS - 1);
}

std::vector<double> GridSpec::S_nodes() const {
    std::vector<double> out(static_cast<std::size_t>(nS));
    for (int i = 0; i < nS; ++i) out[static_cast<std::size_t>(i)] = S(i);
    return out;
}

Field::Field(const GridSpec& s)
    : spec(s), values(static_cast<std::size_t>(s.nS) * static_cast<std::size_t>(s.nT + 1), 0.0) {}

}  // namespace bsfb
