#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hsim/hermite.hpp"
#include "hsim/nelder_mead.hpp"
#include "hsim/procsim.hpp"
#include "hsim/series_fit.hpp"

namespace hsim {

struct FitOptions {
    int starts = 0;  // 0: 1 for d = 1, 16 for d = 2, 64 otherwise
    bool sphere_grid = true;  // false: search only from the supplied start(s)
    std::optional<Eigen::VectorXd> theta_start;
    std::optional<Eigen::VectorXd> beta_start;  // PNLSI only
    NelderMeadOptions nm;
    double theta_box = 10.0;  // admissible set |theta|_inf <= theta_box
    InnerOptions inner;
    bool inference = true;    // fill sigma2_hat, local_time_hat and theta_cov
};

struct OptTrace {
    int iterations = 0;
    int evaluations = 0;
    int restarts = 0;
    int best_start = -1;
    bool converged = false;
    std::vector<double> best_so_far;  // running minimum after each start
};

struct FitResult {
    ModelKind kind = ModelKind::SI;
    long n = 0;
    int k = 0;
    Eigen::VectorXd theta_hat;
    Eigen::VectorXd theta_emp;
    Eigen::VectorXd beta_hat;  // empty for SI
    std::optional<HRegularSpec> trend;
    SeriesLink link;
    double objective = 0.0;
    double sigma2_hat = 0.0;
    double local_time_hat = 0.0;
    Eigen::MatrixXd theta_cov;
    bool hessian_singular = false;
    double inner_cond = 0.0;
    OptTrace trace;
};

/// theta / |theta|, negated iff the first entry with |theta_j| > 1e-10 is negative.
/// Throws std::invalid_argument on the zero vector.
Eigen::VectorXd sign_fix(const Eigen::VectorXd& theta);

/// Deterministic start directions on the half sphere {first nonzero entry > 0}.
std::vector<Eigen::VectorXd> sphere_starts(int d, int count);

/// Profile objectives 1/2 * RSS after the inner least-squares solve. When the
/// series design is degenerate the ridge-penalized value RSS + lambda |c|^2 is
/// used; points outside the theta box are charged above the null-model RSS.
double objective_si(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& theta, int k,
                    const FitOptions& opts = {});
double objective_plsi(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& theta, int k,
                      const FitOptions& opts = {});
double objective_pnlsi(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const HRegularSpec& f,
                       const Eigen::VectorXd& beta, const Eigen::VectorXd& theta, int k,
                       const FitOptions& opts = {});

FitResult fit_si(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, int k, const FitOptions& opts = {});
FitResult fit_plsi(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, int k, const FitOptions& opts = {});
FitResult fit_pnlsi(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const HRegularSpec& f, int k,
                    const FitOptions& opts = {});
FitResult fit_model(ModelKind kind, const Eigen::VectorXd& y, const Eigen::MatrixXd& x, int k,
                    const FitOptions& opts = {}, const std::optional<HRegularSpec>& f = std::nullopt);

/// Fitted values of a fit on regressors x.
Eigen::VectorXd fitted_values(const FitResult& fit, const Eigen::MatrixXd& x);

}  // namespace hsim
