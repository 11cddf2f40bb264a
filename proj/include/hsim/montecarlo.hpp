#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsim/estimators.hpp"
#include "hsim/procsim.hpp"

namespace hsim {

/// How each replication's optimizer is started.
///  - LocalTruth: one Nelder-Mead search from theta0 with a small initial simplex
///    (the usual simulation protocol; reproduces the published tables).
///  - Global: the estimator's default multi-start over the sphere grid.
enum class StartProtocol { LocalTruth, Global };

std::string to_string(StartProtocol protocol);
StartProtocol parse_start_protocol(const std::string& text);

struct McOptions {
    long n = 400;
    int reps = 200;
    int k = 0;  // 0: truncation_k(n)
    std::uint64_t seed = 1;
    int jobs = 1;
    StartProtocol protocol = StartProtocol::LocalTruth;
    double local_step = 0.05;
    FitOptions fit;
    std::optional<double> band_probe;  // record g_hat and band half width at this u
    double band_level = 0.8;
};

struct ReplicationEstimate {
    int index = 0;
    Eigen::VectorXd theta_hat;
    Eigen::VectorXd theta_emp;
    Eigen::VectorXd beta_hat;
    double objective = 0.0;
    double sigma2_hat = 0.0;
    bool converged = true;
    double g_probe = 0.0;
    double half_width_probe = 0.0;
};

/// Per-component Bias = mean - truth and S.d. = sqrt(mean squared deviation from the mean).
struct ComponentStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd bias;
    Eigen::VectorXd sd;
};

ComponentStats bias_sd(const std::vector<Eigen::VectorXd>& estimates, const Eigen::VectorXd& truth);

/// Rotated-coordinate diagnostics for theta0 = e_1: alpha = theta_hat, alpha_unit = theta_hat / |theta_hat|.
struct RotatedStats {
    ComponentStats alpha;
    ComponentStats unit;
    std::vector<Eigen::VectorXd> alpha_values;
    std::vector<Eigen::VectorXd> unit_values;
};

struct McReport {
    ScenarioSpec scenario;
    long n = 0;
    int reps = 0;
    int k = 0;
    std::uint64_t seed = 0;
    StartProtocol protocol = StartProtocol::LocalTruth;
    ComponentStats theta;
    ComponentStats theta_emp;
    std::optional<ComponentStats> beta;
    std::optional<RotatedStats> rotated;  // filled when theta0 = e_1
    int nonconverged = 0;
    double wallclock = 0.0;
    std::vector<ReplicationEstimate> estimates;
};

/// Fits one replication: data from replication_seed(opts.seed, index).
ReplicationEstimate run_replication(const ScenarioSpec& scenario, const McOptions& opts, int k, int index);

/// Runs opts.reps independent replications. Results do not depend on opts.jobs.
McReport run_mc(const ScenarioSpec& scenario, const McOptions& opts);

/// Throws std::invalid_argument unless theta0 is the first canonical basis vector.
RotatedStats rotated_stats(const std::vector<ReplicationEstimate>& estimates, const Eigen::VectorXd& theta0);

/// Least-squares slope of log(value) on log(n).
double loglog_slope(const std::vector<long>& ns, const std::vector<double>& values);

struct RateRow {
    std::string estimand;  // "theta", "theta_emp", "beta"
    std::vector<double> median_error;
    double slope = 0.0;
};

struct RateStudy {
    std::vector<long> ns;
    std::vector<RateRow> rows;
    std::vector<McReport> reports;
    /// Fraction of bootstrap resamples (replications resampled within each n)
    /// in which the theta slope is shallower than the theta_emp slope.
    double theta_shallower_fraction = 0.0;
};

/// Median estimation errors per n and their log-log slopes. Each n uses
/// k = truncation_k(n) and its own derived seed.
RateStudy rate_study(const ScenarioSpec& scenario, const std::vector<long>& ns, const McOptions& base,
                     int bootstrap = 200);

}  // namespace hsim
