#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsim/estimators.hpp"
#include "hsim/inference.hpp"
#include "hsim/selection.hpp"

namespace hsim {

/// Quarterly macro panel: log consumption c, log income i, log investment v, interest rate r.
struct MacroPanel {
    std::vector<std::string> dates;
    Eigen::VectorXd c, i, v, r;
    bool detrended = false;
    Eigen::Vector3d drift = Eigen::Vector3d::Zero();  // (mu_c, mu_i, mu_v)

    long size() const { return static_cast<long>(dates.size()); }
};

/// Reads CSV with header `date,C,I,V,r`, takes logs of C, I, V.
/// Throws std::runtime_error naming the row/column on schema, positivity or date-order violations.
MacroPanel ingest(std::istream& in);
MacroPanel ingest(const std::string& path);

/// Writes the panel back as levels in the ingest format (17 significant digits).
void write_panel_csv(std::ostream& out, const MacroPanel& panel);

/// Removes the estimated drift mu = mean first difference from c, i, v: x~_t = x_t - mu * t, t = 1..T.
MacroPanel detrend(const MacroPanel& panel);

struct Regressors {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    std::vector<int> t;  // panel time index (1-based) of each row
};

/// y_t = c~_t, x_t = (i~_{t-1}, i~_t, v~_t, v~_{t-1}, r_t) for t = 2..T.
Regressors build_regressors(const MacroPanel& panel);

enum class EmpiricalModel { PLSI, SI, Linear };
std::string to_string(EmpiricalModel model);

/// In-sample fitted values for one model.
Eigen::VectorXd fit_predict(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, EmpiricalModel model, int k,
                            const FitOptions& opts, const Eigen::MatrixXd& x_new);

/// (1/n) sum (y_t - y^_t)^2 with all parameters fitted on the full sample.
double mse_in(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, EmpiricalModel model, int k,
              const FitOptions& opts = {});

/// Rolling one-step forecasts: for j = 1..count fit on panel rows t <= start + step*j
/// and forecast t = start + 1 + step*j.
struct OutOfSampleProtocol {
    int start = 178;
    int step = 2;
    int count = 10;
};

struct OutOfSample {
    std::vector<int> forecast_t;
    std::vector<double> forecast;
    std::vector<double> actual;
    double mse = 0.0;
};

/// Throws std::invalid_argument when the sample is too short for the protocol.
OutOfSample mse_out(const Regressors& data, EmpiricalModel model, int k, const OutOfSampleProtocol& protocol = {},
                    const FitOptions& opts = {});

struct MseRow {
    EmpiricalModel model = EmpiricalModel::PLSI;
    int k = 0;  // 0 for the linear model
    double in = 0.0;
    double out = 0.0;
};

struct EmpiricalConfig {
    std::optional<int> k_plsi;  // nullopt: choose by GCV
    std::optional<int> k_si;
    std::vector<int> gcv_candidates = default_gcv_candidates();
    std::vector<int> plsi_sweep = {3, 4, 5, 6, 7};
    std::vector<int> si_sweep = {1, 2, 3, 4, 5};
    OutOfSampleProtocol protocol;
    FitOptions fit;
    int jobs = 1;
    double band_level = 0.8;
    int band_points = 81;
};

struct EmpiricalReport {
    Eigen::Vector3d drift = Eigen::Vector3d::Zero();
    long n = 0;
    std::optional<GcvTable> gcv_plsi;
    std::optional<GcvTable> gcv_si;
    int k_plsi = 0;
    int k_si = 0;
    FitResult plsi;
    FitResult si;
    Eigen::VectorXd beta_linear;
    std::vector<MseRow> table;
    OutOfSample plsi_forecasts;  // rolling forecasts at the chosen k
    BandResult band;
};

/// Detrend, build regressors, select k, fit the three models and tabulate MSEs.
EmpiricalReport run_empirical(const MacroPanel& panel, const EmpiricalConfig& cfg);

/// Fitted values of model (5c)-style PLSI used to synthesize fixtures.
struct SyntheticMacro {
    MacroPanel panel;  // levels, ready to write as CSV
    Regressors exact;  // regressors and response before any re-estimation of drifts
};

/// Synthetic quarterly panel from the partially linear single-index model with
/// the reference coefficients; drifts (0.1022, 0.1302, 0.0181), noise s.d. 0.3.
SyntheticMacro synthesize_macro(std::uint64_t seed, int length = 199);

}  // namespace hsim
