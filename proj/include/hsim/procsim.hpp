#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "hsim/hermite.hpp"

namespace hsim {

enum class ModelKind { SI, PLSI, PNLSI };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

/// A named closed-form link g with its derivative.
struct LinkFunction {
    std::string name;
    std::function<double(double)> g;
    std::function<double(double)> dg;
    Eigen::VectorXd params;  // Hermite coefficients for name == "hermite"
};

/// Known-form H-regular trend f(beta' x) of the partially nonlinear model.
struct HRegularSpec {
    std::string label;
    std::function<double(double)> f;
    std::function<double(double)> fdot;
};

/// Closed-form links: "gauss_poly" (1+u^2)exp(-u^2), "gauss" exp(-u^2), "zero",
/// and "hermite" (series with the given coefficients).
LinkFunction make_link(const std::string& name, const Eigen::VectorXd& params = {});

/// H-regular trends: "identity", "square", "cube", and "zero" (no trend).
HRegularSpec make_hregular(const std::string& label);

/// Max |fdot - central difference of f| over a probe grid in [-span, span].
double hregular_derivative_gap(const HRegularSpec& spec, double span = 5.0, int points = 41);

struct ProcessConfig {
    long n = 400;
    int d = 2;
    double r0 = 0.1;     // AR(1) coefficient of the innovations
    double sigma = 0.6;  // innovation standard deviation
    Eigen::VectorXd x0;  // empty means zero
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument when |r0| >= 1, sigma < 0, n < 1 or d < 1.
    void validate() const;
};

struct ScenarioSpec {
    std::string name;
    ModelKind kind = ModelKind::SI;
    Eigen::VectorXd theta0;
    Eigen::VectorXd beta0;  // empty for SI
    LinkFunction link;
    std::optional<HRegularSpec> trend;  // PNLSI only
    double noise_sd = 1.0;
    ProcessConfig process;

    /// Checks the identification convention and dimension agreement.
    void validate() const;
};

/// Single-index design with theta0 = (0.6, 0.8), sigma = 0.6.
ScenarioSpec example51_part1();
/// Single-index design with theta0 = (1, 0), sigma = 0.6.
ScenarioSpec example51_part2();
/// Partially linear design with beta0 = (0.3, 0.5), theta0 = (0.6, -0.8), sigma = 0.8.
ScenarioSpec example52();
/// Looks up a built-in scenario by name ("ex51-part1", "ex51-part2", "ex52").
std::optional<ScenarioSpec> builtin_scenario(const std::string& name);

/// x_t = x_{t-1} + v_t, v_t = r0 v_{t-1} + eps_t, eps_t ~ N(0, sigma^2 I_d), v_0 = 0.
/// Row t-1 holds x_t. Draws come from substream 1 of cfg.seed.
Eigen::MatrixXd gen_integrated(const ProcessConfig& cfg);

/// y_t = [beta0' x_t | f(beta0' x_t)] + g(theta0' x_t) + e_t with e_t ~ N(0, noise_sd^2)
/// drawn from substream 2 of `seed`.
Eigen::VectorXd gen_response(const Eigen::MatrixXd& x, const ScenarioSpec& spec, std::uint64_t seed);

/// Seed of the l-th Monte Carlo replication.
std::uint64_t replication_seed(std::uint64_t base, std::uint64_t replication);

}  // namespace hsim
