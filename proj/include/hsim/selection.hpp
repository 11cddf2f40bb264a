#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hsim/estimators.hpp"

namespace hsim {

struct GcvEntry {
    int k = 0;
    double sigma2 = 0.0;  // mean squared fit residual
    double score = 0.0;   // (1 - k/n)^{-2} sigma2, +inf when the fit failed
    bool failed = false;
    Eigen::VectorXd theta_hat;
    Eigen::VectorXd beta_hat;
    double objective = 0.0;
};

struct GcvTable {
    long n = 0;
    std::vector<int> candidates;
    std::vector<double> scores;
    std::vector<GcvEntry> fits;
    int chosen = 0;
};

struct GcvOptions {
    FitOptions fit;
    bool warm_start = true;      // seed each fit with the previous k's theta_hat
    double tie_rel_tol = 1e-8;   // scores within tol * mean(y^2) of the minimum tie; smaller k wins
};

/// (1 - k/n)^{-2} * sigma2.
double gcv_score(double sigma2, int k, long n);

/// Default candidate set {1, ..., 12}.
std::vector<int> default_gcv_candidates();

/// Generalised cross-validation over truncation levels. Fit failures score +inf.
GcvTable gcv_select(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, ModelKind kind,
                    const std::vector<int>& candidates = default_gcv_candidates(), const GcvOptions& opts = {},
                    const std::optional<HRegularSpec>& f = std::nullopt);

}  // namespace hsim
