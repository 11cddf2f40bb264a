#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hsim/estimators.hpp"
#include "hsim/inference.hpp"
#include "hsim/procsim.hpp"
#include "hsim/rng.hpp"

using namespace hsim;

namespace {

struct Sample {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Sample simulate(const ScenarioSpec& s, long n, std::uint64_t seed) {
    ProcessConfig cfg = s.process;
    cfg.n = n;
    cfg.seed = seed;
    Sample out;
    out.x = gen_integrated(cfg);
    out.y = gen_response(out.x, s, seed);
    return out;
}

ScenarioSpec series_scenario(ModelKind kind) {
    ScenarioSpec s = kind == ModelKind::SI ? example51_part1() : example52();
    Eigen::VectorXd c(3);
    c << 1.0, 0.5, -0.3;
    s.link = make_link("hermite", c);
    s.noise_sd = 0.0;
    s.kind = kind;
    return s;
}

FitOptions local_start(const Eigen::VectorXd& theta0) {
    FitOptions o;
    o.theta_start = theta0;
    o.sphere_grid = false;
    o.nm.initial_step = 0.05;
    return o;
}

// Explicit c~(theta) by normal equations, then the residual sum of squares.
double two_stage_objective(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& theta, int k) {
    Eigen::MatrixXd z(x.rows(), k);
    for (Eigen::Index t = 0; t < x.rows(); ++t)
        for (int i = 0; i < k; ++i) z(t, i) = hermite_function(i, x.row(t).dot(theta));
    const Eigen::VectorXd c = (z.transpose() * z).ldlt().solve(z.transpose() * y);
    return 0.5 * (y - z * c).squaredNorm();
}

double rss_from_scratch(const FitResult& f, const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
    return 0.5 * (y - fitted_values(f, x)).squaredNorm();
}

}  // namespace

TEST_SUITE("estimators") {
    TEST_CASE("sign_fix examples") {
        CHECK(sign_fix(Eigen::Vector2d(0.0, -2.0)).isApprox(Eigen::Vector2d(0.0, 1.0)));
        CHECK(sign_fix(Eigen::Vector2d(3.0, 4.0)).isApprox(Eigen::Vector2d(0.6, 0.8)));
        CHECK(sign_fix(Eigen::Vector2d(-0.6, 0.8)).isApprox(Eigen::Vector2d(0.6, -0.8)));
        CHECK(sign_fix(Eigen::Vector3d(1e-12, -3.0, 1.0))[1] > 0.0);
        CHECK_THROWS_AS(sign_fix(Eigen::Vector2d::Zero()), std::invalid_argument);
    }

    TEST_CASE("sphere starts cover the half sphere") {
        for (int d : {1, 2, 3, 5}) {
            const auto starts = sphere_starts(d, d == 1 ? 1 : 16);
            CHECK_FALSE(starts.empty());
            for (const auto& s : starts) {
                CHECK(s.size() == d);
                CHECK(std::abs(s.norm() - 1.0) <= 1e-12);
                CHECK(sign_fix(s).isApprox(s));
            }
        }
        CHECK(sphere_starts(2, 16).size() == 16);
    }

    TEST_CASE("objective examples") {
        const ScenarioSpec s = series_scenario(ModelKind::SI);
        const Sample d = simulate(s, 300, 21);
        CHECK(objective_si(d.y, d.x, s.theta0, 3) <= 1e-8 * d.y.squaredNorm());

        const Eigen::MatrixXd shifted = d.x.array() + 1000.0;
        const double far = objective_si(d.y, shifted, s.theta0, 3);
        CHECK(far == doctest::Approx(0.5 * d.y.squaredNorm()).epsilon(1e-6));

        const ScenarioSpec noisy = example51_part1();
        const Sample r = simulate(noisy, 200, 5);
        const Eigen::Vector2d theta(0.3, 0.9);
        CHECK(objective_si(r.y, r.x, theta, 5) == doctest::Approx(two_stage_objective(r.y, r.x, theta, 5)).epsilon(1e-9));
    }

    TEST_CASE("objective is invariant to row permutation and to the sign of theta") {
        const Sample d = simulate(example51_part1(), 150, 12);
        std::vector<int> perm(150);
        std::iota(perm.begin(), perm.end(), 0);
        std::mt19937 gen(4);
        std::shuffle(perm.begin(), perm.end(), gen);
        Eigen::MatrixXd xp(150, 2);
        Eigen::VectorXd yp(150);
        for (int i = 0; i < 150; ++i) {
            xp.row(i) = d.x.row(perm[i]);
            yp[i] = d.y[perm[i]];
        }
        const Eigen::Vector2d theta(0.5, 0.7);
        const double a = objective_si(d.y, d.x, theta, 6);
        CHECK(objective_si(yp, xp, theta, 6) == doctest::Approx(a).epsilon(1e-10));
        CHECK(objective_si(d.y, d.x, -theta, 6) == doctest::Approx(a).epsilon(1e-10));
        CHECK(objective_plsi(yp, xp, theta, 6) == doctest::Approx(objective_plsi(d.y, d.x, theta, 6)).epsilon(1e-10));
    }

    TEST_CASE("noise-free single index recovers theta0 from the truth") {
        const ScenarioSpec s = series_scenario(ModelKind::SI);
        const Sample d = simulate(s, 400, 2);
        const FitResult f = fit_si(d.y, d.x, 3, local_start(s.theta0));
        CHECK((f.theta_hat - s.theta0).norm() <= 1e-6);
        CHECK(f.sigma2_hat <= 1e-10);
    }

    TEST_CASE("fit invariants") {
        const ScenarioSpec s = example51_part1();
        const Sample d = simulate(s, 400, 3);
        const FitResult f = fit_si(d.y, d.x, 7);
        CHECK(f.kind == ModelKind::SI);
        CHECK(f.k == 7);
        CHECK(f.n == 400);
        CHECK(std::abs(f.theta_emp.norm() - 1.0) <= 1e-10);
        CHECK(f.theta_emp[0] > 0.0);
        CHECK(f.objective == doctest::Approx(rss_from_scratch(f, d.y, d.x)).epsilon(1e-8));
        CHECK(f.trace.restarts == 16);
        REQUIRE(f.trace.best_so_far.size() == 16);
        for (std::size_t i = 1; i < f.trace.best_so_far.size(); ++i) {
            CHECK(f.trace.best_so_far[i] <= f.trace.best_so_far[i - 1]);
        }
        CHECK(f.objective == f.trace.best_so_far.back());
        CHECK(f.link.origin == SeriesLink::Origin::Fitted);
        CHECK(f.link.k() == 7);
        CHECK(f.theta_cov.rows() == 2);
    }

    TEST_CASE("scalar regressor: theta_emp is exactly one") {
        ScenarioSpec s = example51_part1();
        s.theta0 = Eigen::VectorXd::Ones(1);
        s.process.d = 1;
        const Sample d = simulate(s, 200, 4);
        const FitResult f = fit_si(d.y, d.x, 5);
        CHECK(f.theta_emp.size() == 1);
        CHECK(f.theta_emp[0] == 1.0);
    }

    TEST_CASE("theta_emp does not depend on which start found the basin") {
        const ScenarioSpec s = example51_part1();
        const Sample d = simulate(s, 400, 8);
        const FitResult best = fit_si(d.y, d.x, 7);
        int hits = 0;
        for (const auto& start : sphere_starts(2, 16)) {
            FitOptions o;
            o.theta_start = start;
            o.sphere_grid = false;
            o.inference = false;
            const FitResult f = fit_si(d.y, d.x, 7, o);
            if (f.objective > best.objective * (1.0 + 1e-6)) continue;
            ++hits;
            CHECK((f.theta_emp - best.theta_emp).cwiseAbs().maxCoeff() <= 2e-3);
        }
        CHECK(hits >= 1);
    }

    TEST_CASE("partially linear: pure linear data") {
        ScenarioSpec s = example52();
        s.link = make_link("zero");
        s.noise_sd = 0.0;
        const Sample d = simulate(s, 300, 6);
        const FitResult f = fit_plsi(d.y, d.x, 4);
        CHECK((f.beta_hat - s.beta0).norm() <= 1e-8);
        CHECK(f.link.coeffs.norm() <= 1e-6);
    }

    TEST_CASE("partially linear: optimum is no worse than the truth") {
        const ScenarioSpec s = example52();
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const Sample d = simulate(s, 120, seed);
            const FitResult f = fit_plsi(d.y, d.x, 5);
            // Two-stage oracle at theta0: joint OLS on [X Z].
            Eigen::MatrixXd a(120, 7);
            a.leftCols(2) = d.x;
            for (int t = 0; t < 120; ++t)
                for (int i = 0; i < 5; ++i) a(t, 2 + i) = hermite_function(i, d.x.row(t).dot(s.theta0));
            const Eigen::VectorXd coef = (a.transpose() * a).ldlt().solve(a.transpose() * d.y);
            const double at_truth = 0.5 * (d.y - a * coef).squaredNorm();
            CHECK(f.objective <= at_truth * (1.0 + 1e-10));
            CHECK(f.beta_hat.size() == 2);
            CHECK(f.objective == doctest::Approx(rss_from_scratch(f, d.y, d.x)).epsilon(1e-8));
        }
    }

    TEST_CASE("partially nonlinear with identity trend matches partially linear") {
        const ScenarioSpec s = example52();
        const Sample d = simulate(s, 300, 9);
        const FitResult plsi = fit_plsi(d.y, d.x, 6);
        const FitResult pnlsi = fit_pnlsi(d.y, d.x, make_hregular("identity"), 6);
        CHECK(pnlsi.objective <= plsi.objective * (1.0 + 1e-6));
        CHECK(pnlsi.objective == doctest::Approx(plsi.objective).epsilon(1e-6));
        CHECK(pnlsi.trend.has_value());
    }

    TEST_CASE("partially nonlinear recovers parameters on noise-free data") {
        ScenarioSpec s = series_scenario(ModelKind::PNLSI);
        s.trend = make_hregular("square");
        const Sample d = simulate(s, 300, 10);
        FitOptions o = local_start(s.theta0);
        o.beta_start = s.beta0;
        const FitResult f = fit_pnlsi(d.y, d.x, *s.trend, 3, o);
        CHECK((f.beta_hat - s.beta0).cwiseAbs().maxCoeff() <= 1e-4);
        CHECK((f.theta_hat - s.theta0).cwiseAbs().maxCoeff() <= 1e-4);
        CHECK(f.objective == doctest::Approx(rss_from_scratch(f, d.y, d.x)).epsilon(1e-8).scale(1.0));
    }

    TEST_CASE("misspecified trend fits worse") {
        ScenarioSpec s = example52();
        s.kind = ModelKind::PNLSI;
        s.trend = make_hregular("square");
        const Sample d = simulate(s, 300, 11);
        FitOptions o = local_start(s.theta0);
        o.beta_start = s.beta0;
        const double right = fit_pnlsi(d.y, d.x, *s.trend, 5, o).objective;
        const double wrong = fit_pnlsi(d.y, d.x, make_hregular("zero"), 5, o).objective;
        CHECK(wrong > right);
    }

    TEST_CASE("fit_model dispatches and validates") {
        const Sample d = simulate(example52(), 100, 13);
        CHECK(fit_model(ModelKind::PLSI, d.y, d.x, 4).kind == ModelKind::PLSI);
        CHECK_THROWS(fit_model(ModelKind::PNLSI, d.y, d.x, 4));
        CHECK_THROWS(fit_si(d.y, d.x, 200));
    }
}
