#include "hsim/empirical.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "hsim/parallel.hpp"
#include "hsim/rng.hpp"

namespace hsim {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& cell, long row, const char* column) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != cell.size() || !std::isfinite(value)) {
        throw std::runtime_error("ingest: row " + std::to_string(row) + ", column " + column +
                                 ": not a finite number '" + cell + "'");
    }
    return value;
}

// Least squares without intercept.
Eigen::VectorXd ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
    return x.colPivHouseholderQr().solve(y);
}

FitResult fit_index_model(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, EmpiricalModel model, int k,
                          const FitOptions& opts) {
    FitOptions o = opts;
    o.inference = false;
    return model == EmpiricalModel::PLSI ? fit_plsi(y, x, k, o) : fit_si(y, x, k, o);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

MacroPanel ingest(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("ingest: empty input");
    const auto header = split_csv(trim(line));
    const std::vector<std::string> expected = {"date", "C", "I", "V", "r"};
    std::vector<std::string> got;
    for (const auto& h : header) got.push_back(trim(h));
    if (got != expected) throw std::runtime_error("ingest: header must be 'date,C,I,V,r', got '" + trim(line) + "'");

    std::vector<std::string> dates;
    std::vector<double> c, i, v, r;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = trim(line);
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != 5) {
            throw std::runtime_error("ingest: row " + std::to_string(row) + ": expected 5 columns, got " +
                                     std::to_string(cells.size()));
        }
        for (auto& cell : cells) cell = trim(cell);
        if (cells[0].empty()) throw std::runtime_error("ingest: row " + std::to_string(row) + ", column date: empty");
        if (!dates.empty() && !(dates.back() < cells[0])) {
            throw std::runtime_error("ingest: row " + std::to_string(row) + ", column date: '" + cells[0] +
                                     "' does not follow '" + dates.back() + "' (dates must strictly increase)");
        }
        const char* names[] = {"C", "I", "V"};
        double level[3];
        for (int j = 0; j < 3; ++j) {
            level[j] = parse_cell(cells[j + 1], row, names[j]);
            if (!(level[j] > 0.0)) {
                throw std::runtime_error("ingest: row " + std::to_string(row) + ", column " + names[j] +
                                         ": level must be positive for the log transform, got " + cells[j + 1]);
            }
        }
        dates.push_back(cells[0]);
        c.push_back(std::log(level[0]));
        i.push_back(std::log(level[1]));
        v.push_back(std::log(level[2]));
        r.push_back(parse_cell(cells[4], row, "r"));
    }
    if (dates.empty()) throw std::runtime_error("ingest: no data rows");

    MacroPanel panel;
    panel.dates = std::move(dates);
    panel.c = Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    panel.i = Eigen::Map<Eigen::VectorXd>(i.data(), static_cast<Eigen::Index>(i.size()));
    panel.v = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    panel.r = Eigen::Map<Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
    return panel;
}

MacroPanel ingest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ingest: cannot open '" + path + "'");
    MacroPanel panel = ingest(in);
    std::cerr << "note: unit-root (ADF) checks of C, I, V, r are not performed; supply integrated series\n";
    return panel;
}

void write_panel_csv(std::ostream& out, const MacroPanel& panel) {
    out << "date,C,I,V,r\n";
    for (long t = 0; t < panel.size(); ++t) {
        out << panel.dates[t] << ',' << fmt17(std::exp(panel.c[t])) << ',' << fmt17(std::exp(panel.i[t])) << ','
            << fmt17(std::exp(panel.v[t])) << ',' << fmt17(panel.r[t]) << '\n';
    }
}

MacroPanel detrend(const MacroPanel& panel) {
    const long T = panel.size();
    if (T < 3) throw std::invalid_argument("detrend: need at least 3 observations");
    MacroPanel out = panel;
    Eigen::VectorXd* series[] = {&out.c, &out.i, &out.v};
    for (int j = 0; j < 3; ++j) {
        Eigen::VectorXd& s = *series[j];
        const double mu = (s[T - 1] - s[0]) / static_cast<double>(T - 1);
        out.drift[j] = mu;
        for (long t = 0; t < T; ++t) s[t] -= mu * static_cast<double>(t + 1);
    }
    out.detrended = true;
    return out;
}

Regressors build_regressors(const MacroPanel& panel) {
    if (!panel.detrended) throw std::invalid_argument("build_regressors: panel must be detrended first");
    const long T = panel.size();
    if (T < 2) throw std::invalid_argument("build_regressors: need at least 2 observations");
    Regressors out;
    out.y.resize(T - 1);
    out.x.resize(T - 1, 5);
    for (long t = 1; t < T; ++t) {
        out.y[t - 1] = panel.c[t];
        out.x.row(t - 1) << panel.i[t - 1], panel.i[t], panel.v[t], panel.v[t - 1], panel.r[t];
        out.t.push_back(static_cast<int>(t + 1));
    }
    return out;
}

std::string to_string(EmpiricalModel model) {
    switch (model) {
        case EmpiricalModel::PLSI: return "plsi";
        case EmpiricalModel::SI: return "si";
        case EmpiricalModel::Linear: return "linear";
    }
    return "unknown";
}

Eigen::VectorXd fit_predict(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, EmpiricalModel model, int k,
                            const FitOptions& opts, const Eigen::MatrixXd& x_new) {
    if (model == EmpiricalModel::Linear) return x_new * ols(y, x);
    return fitted_values(fit_index_model(y, x, model, k, opts), x_new);
}

double mse_in(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, EmpiricalModel model, int k,
              const FitOptions& opts) {
    const Eigen::VectorXd resid = y - fit_predict(y, x, model, k, opts, x);
    return resid.squaredNorm() / static_cast<double>(y.size());
}

OutOfSample mse_out(const Regressors& data, EmpiricalModel model, int k, const OutOfSampleProtocol& protocol,
                    const FitOptions& opts) {
    if (protocol.count < 1 || protocol.step < 1 || protocol.start < 2) {
        throw std::invalid_argument("mse_out: protocol needs start >= 2, step >= 1, count >= 1");
    }
    const int first_t = data.t.empty() ? 0 : data.t.front();
    const int last_t = data.t.empty() ? 0 : data.t.back();
    const int needed = protocol.start + 1 + protocol.step * protocol.count;
    if (data.t.empty() || needed > last_t) {
        throw std::invalid_argument("mse_out: sample ends at t = " + std::to_string(last_t) +
                                    " but the protocol forecasts up to t = " + std::to_string(needed));
    }
    OutOfSample out;
    double total = 0.0;
    for (int j = 1; j <= protocol.count; ++j) {
        const int train_end = protocol.start + protocol.step * j;
        const int target = train_end + 1;
        const long rows = train_end - first_t + 1;
        if (rows < 2) throw std::invalid_argument("mse_out: training window is empty");
        const long row_target = target - first_t;
        const Eigen::VectorXd pred = fit_predict(data.y.head(rows), data.x.topRows(rows), model, k, opts,
                                                 data.x.row(row_target));
        out.forecast_t.push_back(target);
        out.forecast.push_back(pred[0]);
        out.actual.push_back(data.y[row_target]);
        total += std::pow(data.y[row_target] - pred[0], 2);
    }
    out.mse = total / protocol.count;
    return out;
}

EmpiricalReport run_empirical(const MacroPanel& panel, const EmpiricalConfig& cfg) {
    const MacroPanel detr = panel.detrended ? panel : detrend(panel);
    const Regressors data = build_regressors(detr);

    EmpiricalReport report;
    report.drift = detr.drift;
    report.n = data.y.size();

    GcvOptions gopts;
    gopts.fit = cfg.fit;
    if (cfg.k_plsi) {
        report.k_plsi = *cfg.k_plsi;
    } else {
        report.gcv_plsi = gcv_select(data.y, data.x, ModelKind::PLSI, cfg.gcv_candidates, gopts);
        report.k_plsi = report.gcv_plsi->chosen;
    }
    if (cfg.k_si) {
        report.k_si = *cfg.k_si;
    } else {
        report.gcv_si = gcv_select(data.y, data.x, ModelKind::SI, cfg.gcv_candidates, gopts);
        report.k_si = report.gcv_si->chosen;
    }

    report.plsi = fit_plsi(data.y, data.x, report.k_plsi, cfg.fit);
    report.si = fit_si(data.y, data.x, report.k_si, cfg.fit);
    report.beta_linear = ols(data.y, data.x);

    // Table rows: PLSI sweep, SI sweep, linear.
    struct Job {
        EmpiricalModel model;
        int k;
    };
    std::vector<Job> jobs;
    for (int k : cfg.plsi_sweep) jobs.push_back({EmpiricalModel::PLSI, k});
    for (int k : cfg.si_sweep) jobs.push_back({EmpiricalModel::SI, k});
    jobs.push_back({EmpiricalModel::Linear, 0});

    // One unit per (row, in-sample or forecast origin j) so refits spread over workers.
    const std::size_t per_row = static_cast<std::size_t>(cfg.protocol.count) + 1;
    std::vector<double> values(jobs.size() * per_row, 0.0);
    mse_out(data, EmpiricalModel::Linear, 0, cfg.protocol, cfg.fit);  // validates the protocol length up front
    parallel_for(cfg.jobs, values.size(), [&](std::size_t u) {
        const Job& job = jobs[u / per_row];
        const int j = static_cast<int>(u % per_row);
        if (j == 0) {
            values[u] = mse_in(data.y, data.x, job.model, job.k, cfg.fit);
            return;
        }
        OutOfSampleProtocol single = cfg.protocol;
        single.start = cfg.protocol.start + cfg.protocol.step * (j - 1);
        single.count = 1;
        values[u] = mse_out(data, job.model, job.k, single, cfg.fit).mse;
    });
    for (std::size_t r = 0; r < jobs.size(); ++r) {
        MseRow row{jobs[r].model, jobs[r].k, values[r * per_row], 0.0};
        for (std::size_t j = 1; j < per_row; ++j) row.out += values[r * per_row + j];
        row.out /= cfg.protocol.count;
        report.table.push_back(row);
    }

    report.plsi_forecasts = mse_out(data, EmpiricalModel::PLSI, report.k_plsi, cfg.protocol, cfg.fit);

    const Eigen::VectorXd index = data.x * report.plsi.theta_hat;
    const double lo = index.minCoeff();
    const double hi = index.maxCoeff();
    const int m = std::max(cfg.band_points, 2);
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(m, lo, hi);
    report.band = g_band(data.y, data.x, report.plsi, grid, cfg.band_level);
    return report;
}

SyntheticMacro synthesize_macro(std::uint64_t seed, int length) {
    if (length < 3) throw std::invalid_argument("synthesize_macro: length must be at least 3");
    Eigen::VectorXd beta(5), theta(5), coeffs(5);
    beta << -0.0479, 0.5701, -1.1689, 1.8685, -0.1223;
    theta << 0.2110, -0.3452, 0.0835, 2.6095, -0.2022;
    coeffs << -89.64, 112.54, -74.65, 28.94, -3.33;
    const SeriesLink link{coeffs, SeriesLink::Origin::Projected};
    const Eigen::Vector3d drift(0.1022, 0.1302, 0.0181);
    constexpr double kNoiseSd = 0.3;

    RandomStream rng(seed, 0x6d6163ULL);
    const long T = length;
    Eigen::VectorXd i(T), v(T), r(T), c(T);
    double il = 8.0, vl = 1.5, rl = 2.0;
    for (long t = 0; t < T; ++t) {
        il += 0.01 * rng.normal();
        vl += 0.02 * rng.normal();
        rl += 0.3 * rng.normal();
        i[t] = il;
        v[t] = vl;
        r[t] = rl;
    }

    SyntheticMacro out;
    out.exact.y.resize(T - 1);
    out.exact.x.resize(T - 1, 5);
    c[0] = 0.0;
    for (long t = 1; t < T; ++t) {
        Eigen::VectorXd xt(5);
        xt << i[t - 1], i[t], v[t], v[t - 1], r[t];
        const double y = beta.dot(xt) + link(theta.dot(xt)) + kNoiseSd * rng.normal();
        out.exact.x.row(t - 1) = xt.transpose();
        out.exact.y[t - 1] = y;
        out.exact.t.push_back(static_cast<int>(t + 1));
        c[t] = y;
    }
    c[0] = c[1];

    MacroPanel& p = out.panel;
    p.c.resize(T);
    p.i.resize(T);
    p.v.resize(T);
    p.r = r;
    for (long t = 0; t < T; ++t) {
        const double tt = static_cast<double>(t + 1);
        p.c[t] = c[t] + drift[0] * tt;
        p.i[t] = i[t] + drift[1] * tt;
        p.v[t] = v[t] + drift[2] * tt;
        const long year = 1960 + t / 4;
        const int month = 1 + 3 * static_cast<int>(t % 4);
        char date[16];
        std::snprintf(date, sizeof date, "%04ld-%02d-01", year, month);
        p.dates.emplace_back(date);
    }
    return out;
}

}  // namespace hsim
