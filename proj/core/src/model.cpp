#include "bsfb/model.hpp"

#include <cmath>

#include "bsfb/error.hpp"

namespace bsfb {

ModelParams::ModelParams(double sigma, double rho, double omega, double k)
    : sigma_(sigma), rho_(rho), omega_(omega), k_(k) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        fail(ErrorKind::DomainError, "sigma must be positive");
    }
    if (!std::isfinite(rho) || !std::isfinite(omega) || !std::isfinite(k)) {
        fail(ErrorKind::DomainError, "model parameters must be finite");
    }
}

ModelParams ModelParams::with_feedback(double sigma, double b, double k) {
    return ModelParams(sigma, b, 1.0, k);
}

double ModelParams::lambda(double S) const { return omega_ * std::pow(S, k_); }

void ResidualReport::add(double residual) {
    const double r = std::fabs(residual);
    max_abs = std::max(max_abs, r);
    sum_sq_ += r * r;
    ++n_samples;
}

void ResidualReport::finish() {
    l2 = n_samples ? std::sqrt(sum_sq_ / static_cast<double>(n_samples)) : 0.0;
}

void ResidualReport::merge(const ResidualReport& other) {
    max_abs = std::max(max_abs, other.max_abs);
    sum_sq_ += other.sum_sq_;
    n_samples += other.n_samples;
    skipped += other.skipped;
    finish();
}

double feedback_term(const PointState& state, const ModelParams& params) {
    return params.b() * std::pow(state.S, params.k() + 1.0) * state.uSS;
}

double pde_residual(const PointState& state, const ModelParams& params, double den_tol) {
    if (!(state.S > 0.0)) fail(ErrorKind::DomainError, "pde_residual requires S > 0");
    const double diffusion = 0.5 * params.sigma() * params.sigma() * state.S * state.S;
    if (params.linear_mode()) return state.ut + diffusion * state.uSS;

    const double x = feedback_term(state, params);
    const double den = 1.0 - x;
    if (std::fabs(den) < den_tol * std::max(1.0, std::fabs(x))) {
        fail(ErrorKind::DegenerateDenominator,
             "1 - b S^{k+1} u_SS = " + std::to_string(den) + " at S=" + std::to_string(state.S));
    }
    return state.ut + diffusion * state.uSS / (den * den);
}

namespace {

bool near(double a, double b) { return std::fabs(a - b) < 1e-14; }

}  // namespace

double u0_family(double S, double t, const std::function<double(double)>& c1,
                 const std::function<double(double)>& c2, const ModelParams& params) {
    if (params.linear_mode()) fail(ErrorKind::LinearModeError, "u0 family requires b != 0");
    if (!(S > 0.0)) fail(ErrorKind::DomainError, "u0 family requires S > 0");
    const double b = params.b();
    const double k = params.k();
    const double affine = S * (c1 ? c1(t) : 0.0) + (c2 ? c2(t) : 0.0);
    if (near(k, 1.0)) return -std::log(S) / b + affine;
    if (near(k, 0.0)) return S * std::log(S) / b + affine;
    return std::pow(S, 1.0 - k) / (b * k * (k - 1.0)) + affine;
}

double u0_family_uSS(double S, const ModelParams& params) {
    if (params.linear_mode()) fail(ErrorKind::LinearModeError, "u0 family requires b != 0");
    if (!(S > 0.0)) fail(ErrorKind::DomainError, "u0 family requires S > 0");
    const double b = params.b();
    const double k = params.k();
    if (near(k, 1.0)) return 1.0 / (b * S * S);
    if (near(k, 0.0)) return 1.0 / (b * S);
    // (1−k)(−k) S^{−k−1} / (b k (k−1)) simplifies to S^{−k−1}/b.
    return (1.0 - k) * (-k) * std::pow(S, -k - 1.0) / (b * k * (k - 1.0));
}

PointState surface_jet(const Surface& u, double S, double t, const numerics::FdOptions& fd_logS,
                       const numerics::FdOptions& fd_t) {
    const long double x = std::log(static_cast<long double>(S));
    const long double tt = t;
    auto in_x = [&](long double xx) { return u(std::exp(xx), tt); };
    auto in_t = [&](long double s) { return u(static_cast<long double>(S), s); };

    const long double ux = numerics::richardson_d1(in_x, x, fd_logS);
    const long double uxx = numerics::richardson_d2(in_x, x, fd_logS);
    const long double ut = numerics::richardson_d1(in_t, tt, fd_t);
    const long double SS = static_cast<long double>(S);

    PointState jet;
    jet.S = S;
    jet.t = t;
    jet.u = static_cast<double>(u(SS, tt));
    jet.uS = static_cast<double>(ux / SS);
    jet.uSS = static_cast<double>((uxx - ux) / (SS * SS));
    jet.ut = static_cast<double>(ut);
    return jet;
}

ResidualReport sample_pde_residual(const Surface& u, const ModelParams& params,
                                   const SampleBox& box,
                                   const std::function<bool(double, double)>& valid,
                                   const StepCap& step_cap) {
    if (!(box.S_min > 0.0) || box.S_max <= box.S_min || box.nS < 1 || box.nT < 1) {
        fail(ErrorKind::DomainError, "sample box must satisfy 0 < S_min < S_max, nS, nT >= 1");
    }
    ResidualReport report;
    for (int j = 0; j < box.nT; ++j) {
        const double t = box.nT == 1 ? box.t_min
                                     : box.t_min + (box.t_max - box.t_min) * j / (box.nT - 1);
        for (int i = 0; i < box.nS; ++i) {
            const double frac = box.nS == 1 ? 0.0 : static_cast<double>(i) / (box.nS - 1);
            const double S = box.log_spaced
                                 ? std::exp(std::log(box.S_min) +
                                            (std::log(box.S_max) - std::log(box.S_min)) * frac)
                                 : box.S_min + (box.S_max - box.S_min) * frac;
            if (valid && !valid(S, t)) {
                report.skip();
                continue;
            }
            numerics::FdOptions fd_x;
            numerics::FdOptions fd_t;
            if (step_cap) {
                const StepLimits lim = step_cap(S, t);
                fd_x.max_step = lim.log_S;
                fd_t.max_step = lim.t;
            }
            try {
                const PointState jet = surface_jet(u, S, t, fd_x, fd_t);
                report.add(pde_residual(jet, params));
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::DegenerateDenominator) throw;
                report.skip();
            }
        }
    }
    report.finish();
    return report;
}

}  // namespace bsfb
