#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "hsim/io.hpp"

using namespace hsim;

namespace {

std::string temp_file(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("hsim_io_" + name);
    std::ofstream(path) << text;
    return path.string();
}

}  // namespace

TEST_SUITE("io") {
    TEST_CASE("number formatting round trips") {
        for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567}) {
            CHECK(std::stod(format_number(v)) == v);
        }
        CHECK(version() == "0.1.0");
        const Json j = to_json(Eigen::VectorXd(Eigen::Vector2d(1.0, std::numeric_limits<double>::quiet_NaN())));
        CHECK(j[1].is_null());
    }

    TEST_CASE("scenario JSON round trip") {
        for (const auto& name : {"ex51-part1", "ex51-part2", "ex52"}) {
            const ScenarioSpec s = load_scenario(name);
            const ScenarioSpec r = scenario_from_json(to_json(s));
            CHECK(r.name == s.name);
            CHECK(r.kind == s.kind);
            CHECK(r.theta0 == s.theta0);
            CHECK(r.process.sigma == s.process.sigma);
            CHECK(r.link.g(0.7) == s.link.g(0.7));
            CHECK(to_json(r) == to_json(s));
        }
    }

    TEST_CASE("scenario overrides on a builtin base") {
        const Json j = Json::parse(R"({"base": "ex52", "noise_sd": 0.5, "process": {"n": 50}})");
        const ScenarioSpec s = scenario_from_json(j);
        CHECK(s.noise_sd == 0.5);
        CHECK(s.process.n == 50);
        CHECK(s.beta0 == example52().beta0);
        CHECK_THROWS(scenario_from_json(Json::parse(R"({"base": "nope"})")));
        CHECK_THROWS(load_scenario("no-such-scenario"));
    }

    TEST_CASE("data CSV exact round trip") {
        Eigen::MatrixXd x(3, 2);
        x << 0.1, 1.0 / 3.0, -7.25, 1e-17, 4.0, 5.5;
        const Eigen::VectorXd y = Eigen::Vector3d(2.0 / 7.0, -1.0, 0.0);
        std::ostringstream out;
        write_data_csv(out, x, y);
        const DataSet d = read_data_csv(temp_file("rt.csv", out.str()));
        CHECK(d.x == x);
        CHECK(d.y == y);
    }

    TEST_CASE("data CSV validation") {
        CHECK_THROWS(read_data_csv(temp_file("h.csv", "t,x1,z\n1,2,3\n")));
        CHECK_THROWS(read_data_csv(temp_file("v.csv", "t,x1,y\n1,abc,3\n")));
        CHECK_THROWS(read_data_csv(temp_file("w.csv", "t,x1,y\n1,2\n")));
        CHECK_THROWS(read_data_csv("/nonexistent/hsim.csv"));
    }

    TEST_CASE("protocol JSON") {
        const OutOfSampleProtocol p = protocol_from_json(Json::parse(R"({"start": 100, "step": 3, "count": 4})"));
        CHECK(p.start == 100);
        CHECK(p.step == 3);
        CHECK(p.count == 4);
        CHECK(protocol_from_json(to_json(p)).count == 4);
    }
}
