#pragma once

#include <Eigen/Dense>

#include "hsim/estimators.hpp"

namespace hsim {

/// Mean squared residual of the fitted model.
double sigma2_hat(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const FitResult& fit);

/// n^{-1/2} sum_t H_0(theta' x_t)^2.
double local_time_hat(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta);

struct ThetaCovariance {
    Eigen::MatrixXd cov;
    bool singular = false;  // some eigenvalue of J was cut by the pseudo-inverse
};

/// J = sum_t g'(theta' x_t)^2 x_t x_t'.
Eigen::MatrixXd hessian_surrogate(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta, const SeriesLink& link);

/// Eigen pseudo-inverse of a symmetric matrix with relative cutoff rel_cut * lambda_max.
ThetaCovariance symmetric_pinv(const Eigen::MatrixXd& j, double rel_cut = 1e-10);

/// sigma2 * J^+ evaluated at the fit. The sqrt(n)-scaled matrix sqrt(n) * J^+
/// tends to a rank-one multiple of theta0 theta0'.
ThetaCovariance theta_cov(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const FitResult& fit);

struct BandResult {
    Eigen::VectorXd grid;
    Eigen::VectorXd center;
    Eigen::VectorXd half_width;
    double level = 0.8;
};

/// Two-sided standard normal multiplier z_{(1+level)/2}.
double band_multiplier(double level);

/// Pointwise band center(u) +- z sigma |Z_k(u)| L^{-1/2} n^{-1/4}.
/// Throws std::domain_error when the local-time estimate is zero.
BandResult g_band(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const FitResult& fit,
                  const Eigen::VectorXd& grid, double level = 0.8);

}  // namespace hsim
