#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "hsim/empirical.hpp"
#include "hsim/estimators.hpp"
#include "hsim/inference.hpp"
#include "hsim/montecarlo.hpp"
#include "hsim/procsim.hpp"
#include "hsim/selection.hpp"

namespace hsim {

using Json = nlohmann::ordered_json;

/// Library version string embedded in every output.
std::string version();

/// %.17g rendering used for every CSV number.
std::string format_number(double v);

Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);  // array of rows
Eigen::VectorXd vector_from_json(const Json& j);

/// Scenario documents use the ScenarioSpec field names:
/// {name, kind, theta0, beta0, link: {name, params}, trend, noise_sd,
///  process: {n, d, r0, sigma, x0, seed}}.
Json to_json(const ScenarioSpec& s);
ScenarioSpec scenario_from_json(const Json& j);

/// A built-in name ("ex51-part1", ...) or a path to a scenario JSON file.
ScenarioSpec load_scenario(const std::string& name_or_path);

Json to_json(const FitOptions& o);
Json to_json(const FitResult& f);
Json to_json(const GcvTable& g);
Json to_json(const ComponentStats& s);
Json to_json(const McReport& r, bool with_estimates = true);
Json to_json(const RateStudy& r);
Json to_json(const OutOfSampleProtocol& p);
OutOfSampleProtocol protocol_from_json(const Json& j);
Json to_json(const EmpiricalReport& r);

struct DataSet {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
};

/// CSV with header `t,x1,...,xd,y`.
DataSet read_data_csv(const std::string& path);
void write_data_csv(std::ostream& out, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// CSV `u,center,lo,hi`.
void write_band_csv(std::ostream& out, const BandResult& band);

/// CSV `k,sigma2,score`.
void write_gcv_csv(std::ostream& out, const GcvTable& g);

/// CSV `estimand,component,mean,bias,sd`, one row per parameter component.
void write_mc_csv(std::ostream& out, const McReport& r);

/// Plain-text table laid out as Bias / S.d. rows per estimand.
std::string format_mc_table(const McReport& r);

/// CSV `model,k,mse_in,mse_out`.
void write_mse_csv(std::ostream& out, const EmpiricalReport& r);

}  // namespace hsim
