#include <doctest.h>

#include <cmath>

#include "hsim/procsim.hpp"
#include "hsim/rng.hpp"
#include "hsim/selection.hpp"

using namespace hsim;

namespace {

struct Sample {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Sample order_two_sample(std::uint64_t seed, long n) {
    ScenarioSpec s = example51_part1();
    Eigen::VectorXd c(2);
    c << 1.0, 0.8;
    s.link = make_link("hermite", c);
    s.noise_sd = 0.0;
    ProcessConfig cfg = s.process;
    cfg.n = n;
    cfg.seed = seed;
    Sample out{gen_integrated(cfg), {}};
    out.y = gen_response(out.x, s, seed);
    return out;
}

}  // namespace

TEST_SUITE("selection") {
    TEST_CASE("score formula and penalty monotonicity") {
        CHECK(gcv_score(0.5, 3, 100) == doctest::Approx(0.5 / (0.97 * 0.97)).epsilon(1e-15));
        double prev = 0.0;
        for (int k = 1; k <= 12; ++k) {
            const double s = gcv_score(1.0, k, 100);
            CHECK(s > prev);
            prev = s;
        }
        CHECK(default_gcv_candidates() == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
    }

    TEST_CASE("true series order two is selected") {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const Sample d = order_two_sample(replication_seed(900, seed), 200);
            const GcvTable t = gcv_select(d.y, d.x, ModelKind::SI, {1, 2, 3, 4, 5, 6});
            CHECK(t.chosen == 2);
        }
    }

    TEST_CASE("table is self-consistent") {
        const ScenarioSpec s = example52();
        ProcessConfig cfg = s.process;
        cfg.n = 200;
        cfg.seed = 3;
        const Eigen::MatrixXd x = gen_integrated(cfg);
        const Eigen::VectorXd y = gen_response(x, s, 3);
        const GcvTable t = gcv_select(y, x, ModelKind::PLSI);
        CHECK(t.n == 200);
        REQUIRE(t.scores.size() == t.candidates.size());
        REQUIRE(t.fits.size() == t.candidates.size());
        bool found = false;
        for (std::size_t i = 0; i < t.fits.size(); ++i) {
            const GcvEntry& e = t.fits[i];
            CHECK_FALSE(e.failed);
            CHECK(std::isfinite(t.scores[i]));
            CHECK(std::abs(t.scores[i] - std::pow(1.0 - e.k / 200.0, -2.0) * e.sigma2) <= 1e-12 * t.scores[i]);
            CHECK(e.sigma2 == doctest::Approx(2.0 * e.objective / 200.0).epsilon(1e-14));
            CHECK(e.beta_hat.size() == 2);
            found = found || e.k == t.chosen;
        }
        CHECK(found);
    }

    TEST_CASE("singleton candidate set") {
        const Sample d = order_two_sample(5, 100);
        CHECK(gcv_select(d.y, d.x, ModelKind::SI, {5}).chosen == 5);
    }

    TEST_CASE("failed fits score infinity without aborting") {
        const Sample d = order_two_sample(6, 100);
        const GcvTable t = gcv_select(d.y, d.x, ModelKind::PNLSI, {2, 3});
        for (const auto& e : t.fits) {
            CHECK(e.failed);
            CHECK(std::isinf(e.score));
        }
        CHECK(t.chosen == 2);
    }

    TEST_CASE("candidate range is validated") {
        const Sample d = order_two_sample(7, 20);
        CHECK_THROWS_AS(gcv_select(d.y, d.x, ModelKind::SI, {10}), std::invalid_argument);
        CHECK_THROWS_AS(gcv_select(d.y, d.x, ModelKind::SI, {0}), std::invalid_argument);
        CHECK_THROWS_AS(gcv_select(d.y, d.x, ModelKind::SI, std::vector<int>{}), std::invalid_argument);
    }
}
