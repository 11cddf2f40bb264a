#pragma once

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace hsim {

/// Evaluated Hermite design row Z_k(u), optionally with its derivative row.
struct BasisEval {
    int k = 0;
    double point = 0.0;
    Eigen::VectorXd values;
    std::optional<Eigen::VectorXd> derivs;
};

/// Truncated Hermite series g_k(x) = sum_i c_i H_i(x).
struct SeriesLink {
    enum class Origin { Projected, Fitted };

    Eigen::VectorXd coeffs;
    Origin origin = Origin::Fitted;

    int k() const { return static_cast<int>(coeffs.size()); }
    double operator()(double u) const;
    double deriv(double u) const;
};

/// Orthonormal Hermite function H_i(x) = (sqrt(pi) 2^i i!)^{-1/2} H_i(x) exp(-x^2/2).
/// Evaluated through the normalized three-term recurrence, with log-scale tracking
/// once the Gaussian seed would underflow.
double hermite_function(int i, double x);

/// d/dx of the orthonormal Hermite function.
double hermite_function_deriv(int i, double x);

/// Fills out[0..k-1] with H_0(u)..H_{k-1}(u) in one recurrence pass.
void hermite_values(int k, double u, double* out);

BasisEval basis_vector(int k, double u, bool with_derivs);

/// Composite Gauss-Legendre rule: `panels` equal panels over [-half_width, half_width],
/// `nodes` points per panel.
struct QuadratureRule {
    int panels = 40;
    int nodes = 50;
    double half_width = 15.0;
};

/// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int nodes, Eigen::VectorXd& x, Eigen::VectorXd& w);

/// Integrates f over the rule's interval.
double integrate(const std::function<double(double)>& f, const QuadratureRule& rule = {});

/// c_i = integral of g(x) H_i(x) dx, i < k. Throws std::domain_error on non-finite g.
SeriesLink project(const std::function<double(double)>& g, int k, const QuadratureRule& rule = {});

/// k = floor(a * n^kappa), clamped to at least 1.
int truncation_k(long n, double a = 3.65, double kappa = 5.0 / 44.0);

}  // namespace hsim
