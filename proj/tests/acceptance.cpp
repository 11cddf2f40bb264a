// Acceptance runner: one PASS/FAIL/SKIP line per criterion.
// Usage: acceptance [--jobs N] [--only i,j,...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hsim/empirical.hpp"
#include "hsim/hermite.hpp"
#include "hsim/io.hpp"
#include "hsim/montecarlo.hpp"
#include "hsim/parallel.hpp"
#include "hsim/rng.hpp"
#include "hsim/selection.hpp"
#include "hsim/series_fit.hpp"

using namespace hsim;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
    Verdict verdict;
    std::string detail;
};

int g_jobs = 1;

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Verdict::Pass : Verdict::Fail, std::move(detail)}; }

// Physicist Hermite polynomial from its explicit sum.
double hermite_poly_sum(int n, double x) {
    double s = 0.0;
    for (int m = 0; m <= n / 2; ++m) {
        s += std::pow(-1.0, m) * std::pow(2.0 * x, n - 2 * m) / (std::tgamma(m + 1.0) * std::tgamma(n - 2 * m + 1.0));
    }
    return std::tgamma(n + 1.0) * s;
}

double hermite_closed_form(int n, double x) {
    const double norm = std::sqrt(std::pow(2.0, n) * std::tgamma(n + 1.0) * std::sqrt(M_PI));
    return hermite_poly_sum(n, x) * std::exp(-0.5 * x * x) / norm;
}

Outcome basis() {
    const int k = 13;
    Eigen::MatrixXd gram(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j <= i; ++j)
            gram(i, j) = gram(j, i) = integrate([&](double u) { return hermite_function(i, u) * hermite_function(j, u); });
    const double orth = (gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
    double closed = 0.0, deriv = 0.0;
    for (int i = 0; i < k; ++i) {
        for (double u = -6.0; u <= 6.0; u += 0.05) {
            closed = std::max(closed, std::abs(hermite_function(i, u) - hermite_closed_form(i, u)));
            const double fd = (hermite_function(i, u + 1e-5) - hermite_function(i, u - 1e-5)) / 2e-5;
            deriv = std::max(deriv, std::abs(hermite_function_deriv(i, u) - fd));
        }
    }
    return verdict(orth <= 1e-8 && closed <= 1e-10 && deriv <= 1e-6,
                   fmt("orthonormality %.2e, closed form %.2e, derivative %.2e", orth, closed, deriv));
}

Outcome inner_solver() {
    RandomStream rng(20240002);
    double worst = 0.0;
    for (int rep = 0; rep < 500; ++rep) {
        const int d = 1 + static_cast<int>(rng.uniform() * 3);
        const int k = 1 + static_cast<int>(rng.uniform() * 6);
        const bool linear = rng.uniform() < 0.5;
        const int p = k + (linear ? d : 0);
        const int n = p + 5 + static_cast<int>(rng.uniform() * (46 - p));
        Eigen::MatrixXd x(n, d);
        Eigen::VectorXd y(n), theta(d);
        for (int j = 0; j < d; ++j) theta[j] = rng.normal();
        theta.normalize();
        for (int t = 0; t < n; ++t) {
            for (int j = 0; j < d; ++j) x(t, j) = 1.5 * rng.normal();
            y[t] = rng.normal();
        }
        const DesignMatrix z = design(x, theta, k);
        Eigen::MatrixXd a(n, p);
        if (linear) a << x, z.z;
        else a = z.z;
        const Eigen::VectorXd oracle = (a.transpose() * a).inverse() * (a.transpose() * y);
        const InnerSolve s = inner_ols(y, z, linear ? &x : nullptr);
        Eigen::VectorXd got(p);
        if (linear) got << s.linear, s.coeffs;
        else got = s.coeffs;
        worst = std::max(worst, (got - oracle).norm() / oracle.norm());
    }
    return verdict(worst <= 1e-8, fmt("max relative deviation %.2e over 500 instances", worst));
}

McOptions mc(long n, int reps, std::uint64_t seed) {
    McOptions o;
    o.n = n;
    o.reps = reps;
    o.seed = seed;
    o.jobs = g_jobs;
    return o;
}

Outcome table1() {
    McOptions o = mc(400, 200, 101);
    o.k = 7;
    const McReport r = run_mc(example51_part1(), o);
    const Eigen::Vector2d bias_ref(0.0043, 0.0063), sd_ref(0.1005, 0.0717);
    const bool bias_ok = ((r.theta_emp.bias - bias_ref).cwiseAbs().array() <= 0.02).all();
    const bool sd_ok = ((r.theta_emp.sd.array() / sd_ref.array() - 1.0).abs() <= 0.35).all();
    return verdict(bias_ok && sd_ok, fmt("bias (%.4f, %.4f), s.d. (%.4f, %.4f)", r.theta_emp.bias[0],
                                         r.theta_emp.bias[1], r.theta_emp.sd[0], r.theta_emp.sd[1]));
}

Outcome table2() {
    const McReport r = run_mc(example51_part2(), mc(1000, 200, 102));
    const RotatedStats& s = *r.rotated;
    int negative = 0;
    for (const auto& u : s.unit_values) negative += (u[0] - 1.0 < 0.0);
    const bool ok = s.alpha.sd[1] < s.alpha.sd[0] && s.unit.sd[0] < s.unit.sd[1] && negative == r.reps;
    return verdict(ok, fmt("sd(alpha) (%.4f, %.4f), sd(unit) (%.2e, %.2e), negative unit bias %d/%d", s.alpha.sd[0],
                           s.alpha.sd[1], s.unit.sd[0], s.unit.sd[1], negative, r.reps));
}

Outcome table3() {
    const McReport r = run_mc(example52(), mc(600, 200, 103));
    const Eigen::Vector2d bias_ref(-0.0002, 0.0001), sd_ref(0.0068, 0.0067);
    const ComponentStats& b = *r.beta;
    const bool ok = ((b.bias - bias_ref).cwiseAbs().array() <= 0.005).all() &&
                    ((b.sd.array() / sd_ref.array() - 1.0).abs() <= 0.5).all();
    return verdict(ok, fmt("beta bias (%.4f, %.4f), s.d. (%.4f, %.4f)", b.bias[0], b.bias[1], b.sd[0], b.sd[1]));
}

Outcome rates() {
    const RateStudy s = rate_study(example52(), {200, 400, 800, 1600}, mc(0, 200, 104), 200);
    double theta = 0, emp = 0, beta = 0;
    for (const auto& row : s.rows) {
        if (row.estimand == "theta") theta = row.slope;
        if (row.estimand == "theta_emp") emp = row.slope;
        if (row.estimand == "beta") beta = row.slope;
    }
    const bool ok = emp >= -1.05 && emp <= -0.45 && beta >= -1.3 && beta <= -0.7 && theta > emp &&
                    s.theta_shallower_fraction >= 0.9;
    return verdict(ok, fmt("slopes theta %.3f, theta_emp %.3f, beta %.3f; bootstrap shallower %.3f", theta, emp, beta,
                           s.theta_shallower_fraction));
}

Outcome coverage() {
    McOptions o = mc(1000, 200, 105);
    o.band_probe = 0.0;
    o.band_level = 0.8;
    const ScenarioSpec s = example51_part1();
    const McReport r = run_mc(s, o);
    const double g0 = s.link.g(0.0);
    int covered = 0;
    for (const auto& e : r.estimates) covered += std::abs(e.g_probe - g0) <= e.half_width_probe;
    const double freq = static_cast<double>(covered) / r.reps;
    return verdict(freq >= 0.70 && freq <= 0.90, fmt("coverage %.3f (%d/%d)", freq, covered, r.reps));
}

Outcome gcv() {
    ScenarioSpec s = example51_part1();
    Eigen::VectorXd c(2);
    c << 1.0, 0.8;
    s.link = make_link("hermite", c);
    s.noise_sd = 0.0;
    std::vector<int> chosen(100);
    parallel_for(g_jobs, chosen.size(), [&](std::size_t i) {
        ProcessConfig cfg = s.process;
        cfg.n = 200;
        cfg.seed = replication_seed(106, i);
        const Eigen::MatrixXd x = gen_integrated(cfg);
        chosen[i] = gcv_select(gen_response(x, s, cfg.seed), x, ModelKind::SI).chosen;
    });
    int hits = 0;
    for (int k : chosen) hits += (k == 2);
    double identity = 0.0;
    for (int k = 1; k <= 12; ++k) {
        for (double s2 : {0.01, 0.7, 3.5}) {
            const double expected = s2 / ((1.0 - k / 200.0) * (1.0 - k / 200.0));
            identity = std::max(identity, std::abs(gcv_score(s2, k, 200) - expected) / expected);
        }
    }
    return verdict(hits >= 90 && identity <= 1e-12, fmt("order 2 chosen %d/100, score identity %.1e", hits, identity));
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome empirical() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "hsim_acceptance";
    fs::create_directories(dir);
    const std::string data = HSIM_DATA_DIR "/macro_fixture.csv";
    auto run = [&](const std::string& tag, int jobs) {
        const std::string cmd = std::string("\"") + HSIM_CLI + "\" empirical --data \"" + data + "\" --seed 7 --jobs " +
                                std::to_string(jobs) + " --out \"" + (dir / (tag + ".json")).string() +
                                "\" > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) throw std::runtime_error("empirical CLI run failed: " + cmd);
        return slurp(dir / (tag + ".json")) + slurp(dir / (tag + ".mse.csv")) + slurp(dir / (tag + ".band.csv"));
    };
    const std::string a = run("a", 1);
    const std::string b = run("b", 1);
    const std::string c = run("c", std::max(4, g_jobs));
    const Json report = Json::parse(slurp(dir / "a.json"));
    std::vector<int> rows;
    for (const auto& r : report["empirical"]["plsi_forecasts"]["rows"]) rows.push_back(r["t"].get<int>());
    std::vector<int> expected;
    for (int t = 181; t <= 199; t += 2) expected.push_back(t);
    const bool ok = a == b && a == c && rows == expected;
    std::string detail = fmt("repeat %s, jobs %s, forecast rows %s", a == b ? "identical" : "DIFFER",
                             a == c ? "identical" : "DIFFER", rows == expected ? "181..199" : "WRONG");

    const char* user = std::getenv("HSIM_MACRO_CSV");
    if (!user) return {ok ? Verdict::Pass : Verdict::Fail, detail + "; published MSE values SKIPPED (set HSIM_MACRO_CSV)"};
    EmpiricalConfig cfg;
    cfg.k_plsi = 5;
    cfg.jobs = g_jobs;
    const EmpiricalReport r = run_empirical(detrend(ingest(std::string(user))), cfg);
    double in = 0, out = 0;
    for (const auto& row : r.table)
        if (row.model == EmpiricalModel::PLSI && row.k == 5) in = row.in, out = row.out;
    const bool published_ok = std::abs(in / 0.0946 - 1.0) <= 0.2 && std::abs(out / 0.1232 - 1.0) <= 0.3;
    return verdict(ok && published_ok, detail + fmt("; PLSI k=5 MSE in %.4f, out %.4f", in, out));
}

bool same(const ComponentStats& a, const ComponentStats& b) {
    return a.mean == b.mean && a.bias == b.bias && a.sd == b.sd;
}

Outcome parallel() {
    McOptions o = mc(300, 48, 110);
    o.jobs = 1;
    const McReport base = run_mc(example52(), o);
    const std::string ref = to_json(base).dump();
    bool ok = true;
    for (int jobs : {4, 16}) {
        o.jobs = jobs;
        const McReport r = run_mc(example52(), o);
        ok = ok && same(base.theta, r.theta) && same(base.theta_emp, r.theta_emp) && same(*base.beta, *r.beta);
        for (std::size_t i = 0; i < r.estimates.size(); ++i)
            ok = ok && r.estimates[i].theta_hat == base.estimates[i].theta_hat &&
                 r.estimates[i].beta_hat == base.estimates[i].beta_hat;
        McReport copy = r;
        copy.wallclock = base.wallclock;
        ok = ok && to_json(copy).dump() == ref;
    }
    return verdict(ok, ok ? "reports identical at jobs 1, 4, 16" : "reports differ across job counts");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria runner"};
    std::vector<int> only;
    app.add_option("--jobs", g_jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--only", only, "criteria to run")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"basis correctness", basis},
        {"inner solver oracle", inner_solver},
        {"ex51-part1 bias and s.d. at n=400", table1},
        {"ex51-part2 rotated orderings at n=1000", table2},
        {"ex52 beta bias and s.d. at n=600", table3},
        {"convergence rate slopes", rates},
        {"band coverage at u=0", coverage},
        {"GCV order selection", gcv},
        {"empirical pipeline determinism", empirical},
        {"parallel determinism", parallel},
    };
    const std::set<int> selected(only.begin(), only.end());
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {Verdict::Fail, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const char* tag = out.verdict == Verdict::Pass ? "PASS" : out.verdict == Verdict::Fail ? "FAIL" : "SKIP";
        failures += out.verdict == Verdict::Fail;
        std::printf("criterion %2d %s: %s | %s (%.1f s)\n", id, tag, criteria[i].first, out.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
