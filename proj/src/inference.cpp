#include "hsim/inference.hpp"

#include <cmath>
#include <stdexcept>

#include "hsim/rng.hpp"

namespace hsim {

double sigma2_hat(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const FitResult& fit) {
    return (y - fitted_values(fit, x)).squaredNorm() / static_cast<double>(y.size());
}

double local_time_hat(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta) {
    if (x.rows() < 1) throw std::invalid_argument("local_time_hat: empty sample");
    const Eigen::VectorXd index = x * theta;
    double total = 0.0;
    double h0 = 0.0;
    for (Eigen::Index t = 0; t < index.size(); ++t) {
        hermite_values(1, index[t], &h0);
        total += h0 * h0;
    }
    return total / std::sqrt(static_cast<double>(x.rows()));
}

Eigen::MatrixXd hessian_surrogate(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta, const SeriesLink& link) {
    const Eigen::VectorXd index = x * theta;
    Eigen::VectorXd w(index.size());
    for (Eigen::Index t = 0; t < index.size(); ++t) {
        const double slope = link.deriv(index[t]);
        w[t] = slope * slope;
    }
    return x.transpose() * w.asDiagonal() * x;
}

ThetaCovariance symmetric_pinv(const Eigen::MatrixXd& j, double rel_cut) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(j);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double top = lambda.cwiseAbs().maxCoeff();
    ThetaCovariance out;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
    if (!(top > 0)) {
        out.singular = true;
    } else {
        for (Eigen::Index i = 0; i < lambda.size(); ++i) {
            if (lambda[i] > rel_cut * top) {
                inv[i] = 1.0 / lambda[i];
            } else {
                out.singular = true;
            }
        }
    }
    out.cov = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

ThetaCovariance theta_cov(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const FitResult& fit) {
    ThetaCovariance out = symmetric_pinv(hessian_surrogate(x, fit.theta_hat, fit.link));
    out.cov *= sigma2_hat(y, x, fit);
    return out;
}

double band_multiplier(double level) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("band level must lie in (0, 1)");
    return normal_quantile(0.5 * (1.0 + level));
}

BandResult g_band(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const FitResult& fit,
                  const Eigen::VectorXd& grid, double level) {
    const double z = band_multiplier(level);
    const double lt = local_time_hat(x, fit.theta_hat);
    if (!(lt > 0.0)) throw std::domain_error("g_band: local-time estimate is zero");
    const double sigma = std::sqrt(sigma2_hat(y, x, fit));
    const double n = static_cast<double>(y.size());
    const double scale = z * sigma / (std::sqrt(lt) * std::pow(n, 0.25));

    BandResult band;
    band.level = level;
    band.grid = grid;
    band.center.resize(grid.size());
    band.half_width.resize(grid.size());
    const int k = fit.link.k();
    Eigen::VectorXd zk(k);
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) throw std::invalid_argument("g_band: grid must be finite");
        hermite_values(k, grid[i], zk.data());
        band.center[i] = zk.dot(fit.link.coeffs);
        band.half_width[i] = scale * zk.norm();
    }
    return band;
}

}  // namespace hsim
