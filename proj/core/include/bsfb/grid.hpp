#pragma once

#include <cstddef>
#include <vector>

namespace bsfb {

/// Tensor grid over [S_min, S_max] × [t_start, t_end].
struct GridSpec {
    double S_min = 0.5;
    double S_max = 2.0;
    int nS = 64;
    double t_start = 0.0;
    double t_end = 1.0;
    int nT = 64;
    bool log_space = true;

    /// Throws DomainError unless 0 < S_min < S_max, nS ≥ 16, nT ≥ 16 and
    /// t_end > t_start.
    void validate() const;

    [[nodiscard]] double S(int i) const;
    [[nodiscard]] double t(int n) const;
    /// Spacing in log S (log grids) or S (uniform grids).
    [[nodiscard]] double dx() const;
    [[nodiscard]] double dt() const { return (t_end - t_start) / nT; }
    [[nodiscard]] std::vector<double> S_nodes() const;
};

/// Samples u(S_i, t_n), stored row-major by time: values[n * nS + i].
struct Field {
    GridSpec spec;
    std::vector<double> values;

    Field() = default;
    explicit Field(const GridSpec& s);

    [[nodiscard]] double& at(int n, int i) { return values[index(n, i)]; }
    [[nodiscard]] double at(int n, int i) const { return values[index(n, i)]; }

private:
    [[nodiscard]] std::size_t index(int n, int i) const {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(spec.nS) +
               static_cast<std::size_t>(i);
    }
};

}  // namespace bsfb
