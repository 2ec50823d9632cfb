// SPDX-License-Identifier: MIT
#include "lvcal/model.hpp"

#include <cmath>
#include <string>

#include "lvcal/errors.hpp"

namespace lvcal {

namespace {

// (1 - e^{-k t}) / k, continuous at k = 0.
double affine_b(double k, double t) {
    if (std::abs(k * t) < 1e-12) return t;
    return -std::expm1(-k * t) / k;
}

// Integral over [0,t] of affine_b(k, s)^2 ds.
double affine_b_sq_integral(double k, double t) {
    const double kt = k * t;
    if (std::abs(kt) < 1e-3) {
        const double t3 = t * t * t;
        return t3 / 3.0 - k * t3 * t / 4.0 + 7.0 * k * k * t3 * t * t / 60.0;
    }
    return (t - 2.0 * affine_b(k, t) + affine_b(2.0 * k, t)) / (k * k);
}

void check_params(const HullWhiteParams& p, const char* name) {
    if (!(p.kappa >= 0.0) || !(p.sigma >= 0.0)) {
        throw ValidationError(std::string(name) + " Hull-White kappa and sigma must be non-negative");
    }
}

}  // namespace

HullWhiteRate::HullWhiteRate(HullWhiteParams params, DiscountCurve curve)
    : params_(params), curve_(std::move(curve)) {}

double HullWhiteRate::phi(double t) const {
    const double b = affine_b(params_.kappa, t);
    return curve_.forward(t) + 0.5 * params_.sigma * params_.sigma * b * b;
}

double HullWhiteRate::phi_integral(double t) const {
    return curve_.integrated_forward(t) +
           0.5 * params_.sigma * params_.sigma * affine_b_sq_integral(params_.kappa, t);
}

double HullWhiteRate::convexity_integral(double t) const {
    if (params_.sigma == 0.0) return 0.0;
    return 0.5 * params_.sigma * params_.sigma * affine_b_sq_integral(params_.kappa, t);
}

double HullWhiteRate::phi_prime(double t) const {
    // Piecewise-constant forwards contribute no slope inside segments.
    return params_.sigma * params_.sigma * affine_b(params_.kappa, t) * std::exp(-params_.kappa * t);
}

double HullWhiteRate::drift(double r, double t) const {
    return phi_prime(t) + params_.kappa * (phi(t) - r);
}

double HullWhiteRate::theta(double t) const {
    if (!(params_.kappa > 0.0)) throw DomainError("Hull-White theta(t) undefined for kappa = 0");
    return phi(t) + phi_prime(t) / params_.kappa;
}

double HullWhiteRate::decay(double dt) const { return std::exp(-params_.kappa * dt); }

double HullWhiteRate::step_std(double dt) const {
    return params_.sigma * std::sqrt(affine_b(2.0 * params_.kappa, dt));
}

CorrelationMatrix make_correlation(double rho_sd, double rho_sf, double rho_df, double rho_su, double rho_du,
                                   double rho_fu) {
    CorrelationMatrix m = CorrelationMatrix::Identity();
    auto set = [&](std::size_t i, std::size_t j, double v) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    };
    set(kDriverSpot, kDriverDom, rho_sd);
    set(kDriverSpot, kDriverFor, rho_sf);
    set(kDriverDom, kDriverFor, rho_df);
    set(kDriverSpot, kDriverVar, rho_su);
    set(kDriverDom, kDriverVar, rho_du);
    set(kDriverFor, kDriverVar, rho_fu);
    return m;
}

Eigen::MatrixXd correlation_cholesky(const Eigen::MatrixXd& rho, double clip_tolerance, bool* clipped) {
    const Eigen::Index n = rho.rows();
    if (rho.cols() != n) throw ValidationError("correlation matrix must be square");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(rho(i, i) - 1.0) > 1e-12) throw ValidationError("correlation diagonal must be 1");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::abs(rho(i, j) - rho(j, i)) > 1e-12) throw ValidationError("correlation matrix must be symmetric");
            if (!(std::abs(rho(i, j)) <= 1.0)) {
                throw ValidationError("correlation entry (" + std::to_string(i) + "," + std::to_string(j) +
                                      ") = " + std::to_string(rho(i, j)) + " outside [-1, 1]");
            }
        }
    }
    if (clipped) *clipped = false;
    Eigen::LLT<Eigen::MatrixXd> llt(rho);
    if (llt.info() == Eigen::Success) return llt.matrixL();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rho);
    if (eig.eigenvalues().minCoeff() < -clip_tolerance) {
        throw ValidationError("correlation matrix not positive semi-definite (min eigenvalue " +
                              std::to_string(eig.eigenvalues().minCoeff()) + ")");
    }
    const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(1e-12);
    Eigen::MatrixXd repaired = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::VectorXd d = repaired.diagonal().cwiseSqrt().cwiseInverse();
    repaired = d.asDiagonal() * repaired * d.asDiagonal();
    Eigen::LLT<Eigen::MatrixXd> fixed(repaired);
    if (fixed.info() != Eigen::Success) throw ValidationError("correlation matrix repair failed");
    if (clipped) *clipped = true;
    return fixed.matrixL();
}

ValidatedModel::ValidatedModel(ModelSpec spec)
    : spec_(std::move(spec)),
      domestic_(spec_.rate_d, spec_.domestic_curve),
      foreign_(spec_.rate_f, spec_.foreign_curve) {
    if (!(spec_.spot0 > 0.0)) throw ValidationError("spot0 must be positive");
    check_params(spec_.rate_d, "domestic");
    check_params(spec_.rate_f, "foreign");
    const CirParams& v = spec_.variance;
    if (!(v.kappa >= 0.0) || !(v.xi >= 0.0) || !(v.theta >= 0.0)) {
        throw ValidationError("CIR kappa, theta and xi must be non-negative");
    }
    if (!(v.u0 > 0.0)) throw ValidationError("initial variance u0 must be positive");
    feller_ = 2.0 * v.kappa * v.theta >= v.xi * v.xi;
    cholesky_ = correlation_cholesky(spec_.correlation, 1e-8, &clipped_);
}

double ValidatedModel::leverage(double s, double t, bool* extrapolated) const {
    if (!spec_.leverage) return 1.0;
    return spec_.leverage->value(s, t, extrapolated);
}

StateVector ValidatedModel::initial_state() const {
    return StateVector{spec_.spot0, domestic_.r0(), foreign_.r0(), spec_.variance.u0, {}};
}

Coefficients eval_coefficients(const ValidatedModel& model, const StateVector& state, double t) {
    const ModelSpec& spec = model.spec();
    const double u_plus = std::max(state.u, 0.0);
    Coefficients c;
    const double lev = model.leverage(state.s, t, &c.extrapolated);
    const double spot_vol = lev * std::sqrt(u_plus);

    c.drift[kDriverSpot] = (state.r_d - state.r_f) * state.s;
    c.diffusion[kDriverSpot] = spot_vol * state.s;

    c.drift[kDriverDom] = model.domestic().drift(state.r_d, t);
    c.diffusion[kDriverDom] = spec.rate_d.sigma;

    c.drift[kDriverFor] = model.foreign().drift(state.r_f, t);
    if (spec.quanto_adjustment) {
        c.drift[kDriverFor] -= spec.correlation(kDriverSpot, kDriverFor) * spec.rate_f.sigma * spot_vol;
    }
    c.diffusion[kDriverFor] = spec.rate_f.sigma;

    c.drift[kDriverVar] = spec.variance.kappa * (spec.variance.theta - u_plus);
    c.diffusion[kDriverVar] = spec.variance.xi * std::sqrt(u_plus);
    return c;
}

void correlate_increments(const Eigen::MatrixXd& chol, std::span<const double> z, std::span<double> out) {
    const auto n = static_cast<std::size_t>(chol.rows());
    if (static_cast<std::size_t>(chol.cols()) != n || z.size() != n || out.size() != n) {
        throw DomainError("correlate_increments: dimension mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= i; ++j) {
            acc += chol(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * z[j];
        }
        out[i] = acc;
    }
}

double sigma_bar_sq(std::span<const double> spot_loadings, const Eigen::MatrixXd& rho_spot) {
    const auto n = static_cast<std::size_t>(rho_spot.rows());
    if (spot_loadings.size() != n) throw DomainError("sigma_bar_sq: dimension mismatch");
    double acc = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t m = 0; m < n; ++m) {
            acc += spot_loadings[l] * rho_spot(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m)) *
                   spot_loadings[m];
        }
    }
    return std::max(acc, 0.0);
}

double sigma_bar_sq_independent(std::span<const double> independent_loadings) {
    double acc = 0.0;
    for (double v : independent_loadings) acc += v * v;
    return acc;
}

std::vector<double> independent_loadings(std::span<const double> spot_loadings, const Eigen::MatrixXd& chol) {
    const auto n = static_cast<std::size_t>(chol.rows());
    if (spot_loadings.size() != n) throw DomainError("independent_loadings: dimension mismatch");
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = k; l < n; ++l) {
            out[k] += spot_loadings[l] * chol(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k));
        }
    }
    return out;
}

double sigma_bar_sq(const ValidatedModel& /*model*/, const StateVector& state, double /*t*/) {
    return state.s * state.s * std::max(state.u, 0.0);
}

DriftFunction fx_drift() {
    return [](const StateVector& x, double) { return (x.r_d - x.r_f) * x.s; };
}

}  // namespace lvcal
