#include "hsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>


namespace hsim {

namespace {

Json stats_or_null(const std::optional<ComponentStats>& s) { return s ? to_json(*s) : Json(nullptr); }

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        out.push_back(cell);
    }
    return out;
}

}  // namespace

std::string version() { return "0.1.0"; }

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json to_json(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_or_null(v[i]));
    return a;
}

Json to_json(const Eigen::MatrixXd& m) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
    return a;
}

Eigen::VectorXd vector_from_json(const Json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected a numeric array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

Json to_json(const ScenarioSpec& s) {
    Json process = {{"n", s.process.n},
                    {"d", s.process.d},
                    {"r0", s.process.r0},
                    {"sigma", s.process.sigma},
                    {"x0", to_json(s.process.x0)},
                    {"seed", s.process.seed}};
    return {{"name", s.name},
            {"kind", to_string(s.kind)},
            {"theta0", to_json(s.theta0)},
            {"beta0", to_json(s.beta0)},
            {"link", {{"name", s.link.name}, {"params", to_json(s.link.params)}}},
            {"trend", s.trend ? Json(s.trend->label) : Json(nullptr)},
            {"noise_sd", s.noise_sd},
            {"process", process}};
}

ScenarioSpec scenario_from_json(const Json& j) {
    ScenarioSpec s;
    if (j.contains("base")) {
        const auto base = builtin_scenario(j.at("base").get<std::string>());
        if (!base) throw std::invalid_argument("unknown base scenario '" + j.at("base").get<std::string>() + "'");
        s = *base;
    }
    if (j.contains("name")) s.name = j.at("name").get<std::string>();
    if (j.contains("kind")) s.kind = parse_model_kind(j.at("kind").get<std::string>());
    if (j.contains("theta0")) s.theta0 = vector_from_json(j.at("theta0"));
    if (j.contains("beta0")) s.beta0 = vector_from_json(j.at("beta0"));
    if (j.contains("link")) {
        const Json& l = j.at("link");
        if (l.is_string()) {
            s.link = make_link(l.get<std::string>());
        } else {
            const Eigen::VectorXd params = l.contains("params") ? vector_from_json(l.at("params")) : Eigen::VectorXd();
            s.link = make_link(l.at("name").get<std::string>(), params);
        }
    }
    if (j.contains("trend")) {
        if (j.at("trend").is_null()) {
            s.trend.reset();
        } else {
            s.trend = make_hregular(j.at("trend").get<std::string>());
        }
    }
    if (j.contains("noise_sd")) s.noise_sd = j.at("noise_sd").get<double>();
    if (j.contains("process")) {
        const Json& p = j.at("process");
        if (p.contains("n")) s.process.n = p.at("n").get<long>();
        if (p.contains("d")) s.process.d = p.at("d").get<int>();
        if (p.contains("r0")) s.process.r0 = p.at("r0").get<double>();
        if (p.contains("sigma")) s.process.sigma = p.at("sigma").get<double>();
        if (p.contains("x0")) s.process.x0 = vector_from_json(p.at("x0"));
        if (p.contains("seed")) s.process.seed = p.at("seed").get<std::uint64_t>();
    } else if (s.theta0.size()) {
        s.process.d = static_cast<int>(s.theta0.size());
    }
    s.validate();
    return s;
}

ScenarioSpec load_scenario(const std::string& name_or_path) {
    if (auto s = builtin_scenario(name_or_path)) return *s;
    std::ifstream in(name_or_path);
    if (!in) throw std::runtime_error("scenario '" + name_or_path + "' is neither a built-in name nor a readable file");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw std::runtime_error("scenario file '" + name_or_path + "': " + e.what());
    }
    return scenario_from_json(j);
}

Json to_json(const FitOptions& o) {
    return {{"starts", o.starts},
            {"sphere_grid", o.sphere_grid},
            {"theta_start", o.theta_start ? to_json(*o.theta_start) : Json(nullptr)},
            {"beta_start", o.beta_start ? to_json(*o.beta_start) : Json(nullptr)},
            {"nm", {{"initial_step", o.nm.initial_step}, {"ftol", o.nm.ftol}, {"max_iter", o.nm.max_iter}}},
            {"theta_box", o.theta_box},
            {"inner",
             {{"ridge_fallback", o.inner.ridge_fallback},
              {"cond_limit", o.inner.cond_limit},
              {"ridge_scale", o.inner.ridge_scale}}}};
}

Json to_json(const FitResult& f) {
    Json trace = {{"iterations", f.trace.iterations},
                  {"evaluations", f.trace.evaluations},
                  {"restarts", f.trace.restarts},
                  {"best_start", f.trace.best_start},
                  {"converged", f.trace.converged},
                  {"best_so_far", f.trace.best_so_far}};
    return {{"kind", to_string(f.kind)},
            {"n", f.n},
            {"k", f.k},
            {"theta_hat", to_json(f.theta_hat)},
            {"theta_emp", to_json(f.theta_emp)},
            {"beta_hat", to_json(f.beta_hat)},
            {"trend", f.trend ? Json(f.trend->label) : Json(nullptr)},
            {"link", {{"basis", "hermite_function"}, {"coeffs", to_json(f.link.coeffs)}}},
            {"objective", f.objective},
            {"sigma2_hat", f.sigma2_hat},
            {"local_time_hat", f.local_time_hat},
            {"theta_cov", to_json(f.theta_cov)},
            {"theta_cov_convention", "sigma2_hat * pinv(sum_t g'(theta'x_t)^2 x_t x_t'); unscaled by sqrt(n)"},
            {"hessian_singular", f.hessian_singular},
            {"inner_cond", number_or_null(f.inner_cond)},
            {"trace", trace}};
}

Json to_json(const GcvTable& g) {
    Json fits = Json::array();
    for (const auto& e : g.fits) {
        fits.push_back({{"k", e.k},
                        {"sigma2", number_or_null(e.sigma2)},
                        {"score", number_or_null(e.score)},
                        {"failed", e.failed},
                        {"objective", number_or_null(e.objective)},
                        {"theta_hat", to_json(e.theta_hat)},
                        {"beta_hat", to_json(e.beta_hat)}});
    }
    Json scores = Json::array();
    for (double s : g.scores) scores.push_back(number_or_null(s));
    return {{"n", g.n}, {"candidates", g.candidates}, {"scores", scores}, {"chosen", g.chosen}, {"fits", fits}};
}

Json to_json(const ComponentStats& s) {
    return {{"mean", to_json(s.mean)}, {"bias", to_json(s.bias)}, {"sd", to_json(s.sd)}};
}

Json to_json(const McReport& r, bool with_estimates) {
    Json out = {{"scenario", to_json(r.scenario)},
                {"n", r.n},
                {"reps", r.reps},
                {"k", r.k},
                {"seed", r.seed},
                {"protocol", to_string(r.protocol)},
                {"theta", to_json(r.theta)},
                {"theta_emp", to_json(r.theta_emp)},
                {"beta", stats_or_null(r.beta)},
                {"nonconverged", r.nonconverged}};
    if (r.rotated) {
        out["rotated"] = {{"alpha", to_json(r.rotated->alpha)}, {"unit", to_json(r.rotated->unit)}};
    } else {
        out["rotated"] = nullptr;
    }
    if (with_estimates) {
        Json est = Json::array();
        for (const auto& e : r.estimates) {
            est.push_back({{"index", e.index},
                           {"theta_hat", to_json(e.theta_hat)},
                           {"theta_emp", to_json(e.theta_emp)},
                           {"beta_hat", to_json(e.beta_hat)},
                           {"objective", e.objective},
                           {"converged", e.converged}});
        }
        out["estimates"] = est;
    }
    return out;
}

Json to_json(const RateStudy& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"estimand", row.estimand}, {"median_error", row.median_error}, {"slope", row.slope}});
    }
    Json reports = Json::array();
    for (const auto& rep : r.reports) reports.push_back(to_json(rep, false));
    return {{"ns", r.ns},
            {"rows", rows},
            {"theta_shallower_fraction", r.theta_shallower_fraction},
            {"reports", reports}};
}

Json to_json(const OutOfSampleProtocol& p) { return {{"start", p.start}, {"step", p.step}, {"count", p.count}}; }

OutOfSampleProtocol protocol_from_json(const Json& j) {
    OutOfSampleProtocol p;
    if (j.contains("start")) p.start = j.at("start").get<int>();
    if (j.contains("step")) p.step = j.at("step").get<int>();
    if (j.contains("count")) p.count = j.at("count").get<int>();
    return p;
}

Json to_json(const EmpiricalReport& r) {
    Json table = Json::array();
    for (const auto& row : r.table) {
        table.push_back({{"model", to_string(row.model)}, {"k", row.k}, {"mse_in", row.in}, {"mse_out", row.out}});
    }
    Json fc = Json::array();
    for (std::size_t j = 0; j < r.plsi_forecasts.forecast_t.size(); ++j) {
        fc.push_back({{"t", r.plsi_forecasts.forecast_t[j]},
                      {"forecast", r.plsi_forecasts.forecast[j]},
                      {"actual", r.plsi_forecasts.actual[j]}});
    }
    return {{"drift", to_json(Eigen::VectorXd(r.drift))},
            {"n", r.n},
            {"k_plsi", r.k_plsi},
            {"k_si", r.k_si},
            {"gcv_plsi", r.gcv_plsi ? to_json(*r.gcv_plsi) : Json(nullptr)},
            {"gcv_si", r.gcv_si ? to_json(*r.gcv_si) : Json(nullptr)},
            {"plsi", to_json(r.plsi)},
            {"si", to_json(r.si)},
            {"beta_linear", to_json(r.beta_linear)},
            {"table", table},
            {"plsi_forecasts", {{"mse", r.plsi_forecasts.mse}, {"rows", fc}}},
            {"band_level", r.band.level}};
}

DataSet read_data_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    const auto header = split(line, ',');
    const std::size_t cols = header.size();
    if (cols < 3 || header.front() != "t" || header.back() != "y") {
        throw std::runtime_error(path + ": header must be t,x1,...,xd,y");
    }
    for (std::size_t j = 1; j + 1 < cols; ++j) {
        if (header[j] != "x" + std::to_string(j)) {
            throw std::runtime_error(path + ": column " + std::to_string(j + 1) + " must be named x" +
                                     std::to_string(j));
        }
    }
    std::vector<std::vector<double>> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line, ',');
        if (cells.size() != cols) {
            throw std::runtime_error(path + ": line " + std::to_string(lineno) + " has " +
                                     std::to_string(cells.size()) + " fields, expected " + std::to_string(cols));
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(c, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != c.size() || !std::isfinite(v)) {
                throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": bad number '" + c + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");
    DataSet ds;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(cols - 2);
    ds.y.resize(n);
    ds.x.resize(n, d);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index j = 0; j < d; ++j) ds.x(t, j) = rows[t][j + 1];
        ds.y[t] = rows[t].back();
    }
    return ds;
}

void write_data_csv(std::ostream& out, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    out << 't';
    for (Eigen::Index j = 0; j < x.cols(); ++j) out << ",x" << j + 1;
    out << ",y\n";
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
        out << t + 1;
        for (Eigen::Index j = 0; j < x.cols(); ++j) out << ',' << format_number(x(t, j));
        out << ',' << format_number(y[t]) << '\n';
    }
}

void write_band_csv(std::ostream& out, const BandResult& band) {
    out << "u,center,lo,hi\n";
    for (Eigen::Index i = 0; i < band.grid.size(); ++i) {
        out << format_number(band.grid[i]) << ',' << format_number(band.center[i]) << ','
            << format_number(band.center[i] - band.half_width[i]) << ','
            << format_number(band.center[i] + band.half_width[i]) << '\n';
    }
}

void write_gcv_csv(std::ostream& out, const GcvTable& g) {
    out << "k,sigma2,score\n";
    for (const auto& e : g.fits) {
        out << e.k << ',' << format_number(e.sigma2) << ',' << format_number(e.score) << '\n';
    }
}

void write_mc_csv(std::ostream& out, const McReport& r) {
    out << "estimand,component,mean,bias,sd\n";
    auto rows = [&](const std::string& name, const ComponentStats& s) {
        for (Eigen::Index j = 0; j < s.mean.size(); ++j) {
            out << name << ',' << j + 1 << ',' << format_number(s.mean[j]) << ',' << format_number(s.bias[j]) << ','
                << format_number(s.sd[j]) << '\n';
        }
    };
    rows("theta", r.theta);
    rows("theta_emp", r.theta_emp);
    if (r.beta) rows("beta", *r.beta);
    if (r.rotated) {
        rows("alpha", r.rotated->alpha);
        rows("alpha_unit", r.rotated->unit);
    }
}

std::string format_mc_table(const McReport& r) {
    std::ostringstream os;
    os << r.scenario.name << "  n=" << r.n << "  M=" << r.reps << "  k=" << r.k << "  seed=" << r.seed
       << "  protocol=" << to_string(r.protocol) << '\n';
    auto block = [&](const std::string& name, const ComponentStats& s) {
        os << std::left << std::setw(12) << name;
        for (Eigen::Index j = 0; j < s.mean.size(); ++j) os << std::setw(14) << (name + "_" + std::to_string(j + 1));
        os << '\n' << std::setw(12) << "  Bias";
        for (Eigen::Index j = 0; j < s.bias.size(); ++j) os << std::setw(14) << std::fixed << std::setprecision(4) << s.bias[j];
        os << '\n' << std::setw(12) << "  S.d.";
        for (Eigen::Index j = 0; j < s.sd.size(); ++j) os << std::setw(14) << std::fixed << std::setprecision(4) << s.sd[j];
        os << '\n';
    };
    block("theta", r.theta);
    block("theta_emp", r.theta_emp);
    if (r.beta) block("beta", *r.beta);
    if (r.rotated) {
        block("alpha", r.rotated->alpha);
        block("alpha_unit", r.rotated->unit);
    }
    if (r.nonconverged) os << "non-converged replications: " << r.nonconverged << '\n';
    return os.str();
}

void write_mse_csv(std::ostream& out, const EmpiricalReport& r) {
    out << "model,k,mse_in,mse_out\n";
    for (const auto& row : r.table) {
        out << to_string(row.model) << ',' << row.k << ',' << format_number(row.in) << ',' << format_number(row.out)
            << '\n';
    }
}

}  // namespace hsim
