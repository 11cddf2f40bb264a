#pragma once

#include <functional>

#include <Eigen/Dense>

namespace hsim {

struct NelderMeadOptions {
    double initial_step = 0.25;  // simplex edge, relative to the start's norm
    double ftol = 1e-10;         // stop when f spread < ftol * (1 + |f_best|)
    int max_iter = 500;
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimization (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2).
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const NelderMeadOptions& opts = {});

}  // namespace hsim
