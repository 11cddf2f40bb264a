#include "hsim/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "hsim/inference.hpp"
#include "hsim/parallel.hpp"
#include "hsim/rng.hpp"

namespace hsim {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty sample");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lower + upper);
}

FitOptions replication_fit_options(const ScenarioSpec& scenario, const McOptions& opts) {
    FitOptions fit = opts.fit;
    if (opts.protocol == StartProtocol::LocalTruth) {
        fit.theta_start = scenario.theta0;
        if (scenario.kind == ModelKind::PNLSI) fit.beta_start = scenario.beta0;
        fit.sphere_grid = false;
        fit.nm.initial_step = opts.local_step;
    }
    fit.inference = opts.band_probe.has_value();
    return fit;
}

}  // namespace

std::string to_string(StartProtocol protocol) {
    return protocol == StartProtocol::LocalTruth ? "local-truth" : "global";
}

StartProtocol parse_start_protocol(const std::string& text) {
    if (text == "local-truth") return StartProtocol::LocalTruth;
    if (text == "global") return StartProtocol::Global;
    throw std::invalid_argument("unknown start protocol '" + text + "'");
}

ComponentStats bias_sd(const std::vector<Eigen::VectorXd>& estimates, const Eigen::VectorXd& truth) {
    if (estimates.empty()) throw std::invalid_argument("bias_sd: no estimates");
    const Eigen::Index d = truth.size();
    ComponentStats s;
    s.mean = Eigen::VectorXd::Zero(d);
    for (const auto& e : estimates) s.mean += e;
    s.mean /= static_cast<double>(estimates.size());
    s.bias = s.mean - truth;
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(d);
    for (const auto& e : estimates) sq += (e - s.mean).cwiseAbs2();
    s.sd = (sq / static_cast<double>(estimates.size())).cwiseSqrt();
    return s;
}

ReplicationEstimate run_replication(const ScenarioSpec& scenario, const McOptions& opts, int k, int index) {
    ProcessConfig cfg = scenario.process;
    cfg.n = opts.n;
    cfg.seed = replication_seed(opts.seed, static_cast<std::uint64_t>(index));
    const Eigen::MatrixXd x = gen_integrated(cfg);
    const Eigen::VectorXd y = gen_response(x, scenario, cfg.seed);
    const FitResult fit = fit_model(scenario.kind, y, x, k, replication_fit_options(scenario, opts), scenario.trend);

    ReplicationEstimate est;
    est.index = index;
    est.theta_hat = fit.theta_hat;
    est.theta_emp = fit.theta_emp;
    est.beta_hat = fit.beta_hat;
    est.objective = fit.objective;
    est.sigma2_hat = fit.sigma2_hat;
    est.converged = fit.trace.converged;
    if (opts.band_probe) {
        Eigen::VectorXd grid(1);
        grid << *opts.band_probe;
        const BandResult band = g_band(y, x, fit, grid, opts.band_level);
        est.g_probe = band.center[0];
        est.half_width_probe = band.half_width[0];
    }
    return est;
}

McReport run_mc(const ScenarioSpec& scenario, const McOptions& opts) {
    scenario.validate();
    if (opts.reps < 2) throw std::invalid_argument("run_mc: need at least 2 replications");
    const auto start = std::chrono::steady_clock::now();

    McReport report;
    report.scenario = scenario;
    report.n = opts.n;
    report.reps = opts.reps;
    report.k = opts.k > 0 ? opts.k : truncation_k(opts.n);
    report.seed = opts.seed;
    report.protocol = opts.protocol;
    report.estimates.resize(static_cast<std::size_t>(opts.reps));
    parallel_for(opts.jobs, report.estimates.size(), [&](std::size_t i) {
        report.estimates[i] = run_replication(scenario, opts, report.k, static_cast<int>(i));
    });

    // Reduce in replication order.
    std::vector<Eigen::VectorXd> theta, emp, beta;
    for (const auto& e : report.estimates) {
        theta.push_back(e.theta_hat);
        emp.push_back(e.theta_emp);
        if (e.beta_hat.size()) beta.push_back(e.beta_hat);
        if (!e.converged) ++report.nonconverged;
    }
    report.theta = bias_sd(theta, scenario.theta0);
    report.theta_emp = bias_sd(emp, scenario.theta0);
    if (scenario.kind != ModelKind::SI) report.beta = bias_sd(beta, scenario.beta0);
    const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(scenario.theta0.size(), 0);
    if (scenario.theta0 == e1) report.rotated = rotated_stats(report.estimates, scenario.theta0);
    report.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

RotatedStats rotated_stats(const std::vector<ReplicationEstimate>& estimates, const Eigen::VectorXd& theta0) {
    if (theta0 != Eigen::VectorXd::Unit(theta0.size(), 0)) {
        throw std::invalid_argument("rotated_stats: theta0 must be the first canonical basis vector");
    }
    RotatedStats out;
    for (const auto& e : estimates) {
        out.alpha_values.push_back(e.theta_hat);
        out.unit_values.push_back(e.theta_hat / e.theta_hat.norm());
    }
    out.alpha = bias_sd(out.alpha_values, theta0);
    out.unit = bias_sd(out.unit_values, theta0);
    return out;
}

double loglog_slope(const std::vector<long>& ns, const std::vector<double>& values) {
    if (ns.size() != values.size() || ns.size() < 2) throw std::invalid_argument("loglog_slope: bad input");
    const std::size_t m = ns.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += std::log(static_cast<double>(ns[i]));
        my += std::log(values[i]);
    }
    mx /= m;
    my /= m;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dx = std::log(static_cast<double>(ns[i])) - mx;
        sxy += dx * (std::log(values[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

RateStudy rate_study(const ScenarioSpec& scenario, const std::vector<long>& ns, const McOptions& base,
                     int bootstrap) {
    if (ns.size() < 3) throw std::invalid_argument("rate_study: need at least three sample sizes");
    if (!std::is_sorted(ns.begin(), ns.end())) throw std::invalid_argument("rate_study: n list must ascend");

    RateStudy study;
    study.ns = ns;
    // errors[estimand][size index][replication]
    std::vector<std::vector<std::vector<double>>> errors(3);
    for (long n : ns) {
        McOptions opts = base;
        opts.n = n;
        opts.k = truncation_k(n);
        opts.seed = derive_seed(base.seed, static_cast<std::uint64_t>(n));
        McReport report = run_mc(scenario, opts);
        std::vector<double> e_theta, e_emp, e_beta;
        for (const auto& e : report.estimates) {
            e_theta.push_back((e.theta_hat - scenario.theta0).norm());
            e_emp.push_back((e.theta_emp - scenario.theta0).norm());
            if (e.beta_hat.size()) e_beta.push_back((e.beta_hat - scenario.beta0).norm());
        }
        errors[0].push_back(std::move(e_theta));
        errors[1].push_back(std::move(e_emp));
        errors[2].push_back(std::move(e_beta));
        study.reports.push_back(std::move(report));
    }

    const char* names[] = {"theta", "theta_emp", "beta"};
    for (int e = 0; e < 3; ++e) {
        if (errors[e].front().empty()) continue;
        RateRow row;
        row.estimand = names[e];
        for (const auto& sample : errors[e]) row.median_error.push_back(median(sample));
        row.slope = loglog_slope(ns, row.median_error);
        study.rows.push_back(std::move(row));
    }

    if (bootstrap > 0) {
        RandomStream rng(base.seed, 0xb0075ULL);
        int shallower = 0;
        for (int b = 0; b < bootstrap; ++b) {
            std::vector<double> med_theta, med_emp;
            for (std::size_t s = 0; s < ns.size(); ++s) {
                const std::size_t m = errors[0][s].size();
                std::vector<double> rt(m), re(m);
                for (std::size_t i = 0; i < m; ++i) {
                    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(m));
                    rt[i] = errors[0][s][j];
                    re[i] = errors[1][s][j];
                }
                med_theta.push_back(median(rt));
                med_emp.push_back(median(re));
            }
            if (loglog_slope(ns, med_theta) > loglog_slope(ns, med_emp)) ++shallower;
        }
        study.theta_shallower_fraction = static_cast<double>(shallower) / bootstrap;
    }
    return study;
}

}  // namespace hsim
