#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "hsim/hermite.hpp"

namespace hsim {

/// n x k matrix with row t = Z_k(theta' x_t)'.
struct DesignMatrix {
    Eigen::MatrixXd z;

    Eigen::Index rows() const { return z.rows(); }
    Eigen::Index cols() const { return z.cols(); }
};

DesignMatrix design(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta, int k);

/// Design from precomputed index values u_t = theta' x_t.
DesignMatrix design_from_index(const Eigen::VectorXd& index, int k);

class RankDeficient : public std::runtime_error {
public:
    explicit RankDeficient(double cond)
        : std::runtime_error("series design is rank deficient (cond = " + std::to_string(cond) + ")"),
          cond_(cond) {}
    double cond() const { return cond_; }

private:
    double cond_;
};

struct InnerOptions {
    bool ridge_fallback = true;
    double cond_limit = 1e12;
    double ridge_scale = 1e-8;  // lambda = ridge_scale * trace(Z'Z) / k
};

struct InnerSolve {
    Eigen::VectorXd coeffs;  // c~
    Eigen::VectorXd linear;  // beta~, empty without a linear block
    double rss = 0.0;
    double cond = 0.0;       // condition number of the column-equilibrated normal matrix
    bool ridge = false;      // true when the ridge fallback produced the solution
    double penalty = 0.0;    // lambda |c~|^2 of the ridge fit, 0 otherwise
};

/// Least squares of y on Z, or jointly on [X Z] when `x` is non-null.
/// Solved by Householder QR of the column-equilibrated stacked design.
/// Throws RankDeficient when cond > cond_limit and the ridge fallback is disabled.
InnerSolve inner_ols(const Eigen::VectorXd& y, const DesignMatrix& z, const Eigen::MatrixXd* x = nullptr,
                     const InnerOptions& opts = {});

/// Z_k(u)' c.
double plugin_g(const SeriesLink& link, double u);
/// dZ_k(u)' c.
double plugin_g_deriv(const SeriesLink& link, double u);

}  // namespace hsim
