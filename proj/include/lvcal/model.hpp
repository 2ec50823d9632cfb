// SPDX-License-Identifier: MIT
/// @file model.hpp
/// @brief Hybrid spot / short-rate / variance model specification
///
/// Spot:      dS = (r^d - r^f) S dt + L(S,t) S sqrt(U) dW^S
/// Rates:     Hull-White, r = x + phi(t) with dx = -kappa x dt + sigma dW,
///            phi fitted so that E^DRN[exp(-int r)] reproduces the curve.
/// Variance:  CIR dU = kappa (theta - U) dt + xi sqrt(U) dW^U.
///
/// A pure local-vol model is the special case xi = kappa = 0, U = u0 with L
/// carrying sigma_LV (u0 = 1). Drivers are ordered (S, d, f, U).

#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lvcal/curves.hpp"
#include "lvcal/leverage_surface.hpp"

namespace lvcal {

enum Driver : std::size_t { kDriverSpot = 0, kDriverDom = 1, kDriverFor = 2, kDriverVar = 3 };
inline constexpr std::size_t kDriverCount = 4;

struct HullWhiteParams {
    double kappa = 0.0;
    double sigma = 0.0;
};

struct CirParams {
    double kappa = 0.0;
    double theta = 1.0;
    double xi = 0.0;
    double u0 = 1.0;
};

/// Hull-White rate fitted to a discount curve through the shift phi(t).
class HullWhiteRate {
public:
    HullWhiteRate(HullWhiteParams params, DiscountCurve curve);

    const HullWhiteParams& params() const noexcept { return params_; }
    const DiscountCurve& curve() const noexcept { return curve_; }

    /// phi(t) = f(0,t) + sigma^2/(2 kappa^2) (1 - e^{-kappa t})^2
    double phi(double t) const;
    /// Integral of phi over [0, t].
    double phi_integral(double t) const;
    /// phi_integral(t) + log P(0,t): the convexity part, exactly 0 when sigma = 0.
    double convexity_integral(double t) const;
    /// Drift of r at (r, t): phi'(t) + kappa (phi(t) - r).
    double drift(double r, double t) const;
    /// Mean-reversion level theta(t) = phi + phi'/kappa (kappa > 0).
    double theta(double t) const;
    double r0() const { return phi(0.0); }

    /// e^{-kappa dt}
    double decay(double dt) const;
    /// Standard deviation of the exact OU step over dt.
    double step_std(double dt) const;

private:
    double phi_prime(double t) const;

    HullWhiteParams params_;
    DiscountCurve curve_;
};

/// Symmetric, unit-diagonal correlation over the four drivers.
using CorrelationMatrix = Eigen::Matrix4d;

CorrelationMatrix make_correlation(double rho_sd, double rho_sf, double rho_df, double rho_su, double rho_du = 0.0,
                                   double rho_fu = 0.0);

struct ModelSpec {
    double spot0 = 1.0;
    DiscountCurve domestic_curve = DiscountCurve::flat(0.0);
    DiscountCurve foreign_curve = DiscountCurve::flat(0.0);
    HullWhiteParams rate_d;
    HullWhiteParams rate_f;
    bool quanto_adjustment = true;
    CirParams variance;
    std::optional<LeverageSurface> leverage;
    CorrelationMatrix correlation = CorrelationMatrix::Identity();
};

struct StateVector {
    double s = 0.0;
    double r_d = 0.0;
    double r_f = 0.0;
    double u = 0.0;
    std::vector<double> factors;
};

/// Model after validation: cached Cholesky factor, fitted rates and diagnostics.
class ValidatedModel {
public:
    explicit ValidatedModel(ModelSpec spec);

    const ModelSpec& spec() const noexcept { return spec_; }
    const Eigen::Matrix4d& cholesky() const noexcept { return cholesky_; }
    const HullWhiteRate& domestic() const noexcept { return domestic_; }
    const HullWhiteRate& foreign() const noexcept { return foreign_; }

    bool feller_satisfied() const noexcept { return feller_; }
    bool correlation_clipped() const noexcept { return clipped_; }
    bool stochastic_variance() const noexcept { return spec_.variance.xi > 0.0 || spec_.variance.kappa > 0.0; }

    /// Leverage at (s, t); 1 when the spec has no leverage surface.
    double leverage(double s, double t, bool* extrapolated = nullptr) const;

    StateVector initial_state() const;

private:
    ModelSpec spec_;
    Eigen::Matrix4d cholesky_;
    HullWhiteRate domestic_;
    HullWhiteRate foreign_;
    bool feller_ = true;
    bool clipped_ = false;
};

inline ValidatedModel validate_model(ModelSpec spec) { return ValidatedModel(std::move(spec)); }

/// Drift and own-driver diffusion loading per factor (S, r^d, r^f, U).
struct Coefficients {
    std::array<double, kDriverCount> drift{};
    std::array<double, kDriverCount> diffusion{};
    bool extrapolated = false;
};

Coefficients eval_coefficients(const ValidatedModel& model, const StateVector& state, double t);

/// out = chol * z; throws on dimension mismatch.
void correlate_increments(const Eigen::MatrixXd& chol, std::span<const double> z, std::span<double> out);

/// Cholesky factor of a correlation matrix with eigenvalue clipping of
/// negative eigenvalues down to -clip_tolerance; sets *clipped when repaired.
Eigen::MatrixXd correlation_cholesky(const Eigen::MatrixXd& rho, double clip_tolerance = 1e-8,
                                     bool* clipped = nullptr);

/// sigma_bar^2 = sum_{l,m} sigma_l rho_lm sigma_m over the spot drivers.
double sigma_bar_sq(std::span<const double> spot_loadings, const Eigen::MatrixXd& rho_spot);

/// sigma_bar^2 = sum_k sigma_hat_k^2 in the independent-driver form.
double sigma_bar_sq_independent(std::span<const double> independent_loadings);

/// Loadings on independent drivers: sigma_hat = chol^T sigma.
std::vector<double> independent_loadings(std::span<const double> spot_loadings, const Eigen::MatrixXd& chol);

/// sigma_bar^2 of the concrete model: s^2 u (the leverage is excluded).
double sigma_bar_sq(const ValidatedModel& model, const StateVector& state, double t);

/// Drift mu(S, Y, t) of the generalized spot SDE.
using DriftFunction = std::function<double(const StateVector&, double)>;

/// mu = (r^d - r^f) S.
DriftFunction fx_drift();

}  // namespace lvcal
