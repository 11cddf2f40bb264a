#include "hsim/procsim.hpp"

#include <cmath>
#include <stdexcept>

#include "hsim/rng.hpp"

namespace hsim {

namespace {

constexpr std::uint64_t kRegressorStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::SI: return "si";
        case ModelKind::PLSI: return "plsi";
        case ModelKind::PNLSI: return "pnlsi";
    }
    return "unknown";
}

ModelKind parse_model_kind(const std::string& text) {
    if (text == "si" || text == "SI") return ModelKind::SI;
    if (text == "plsi" || text == "PLSI") return ModelKind::PLSI;
    if (text == "pnlsi" || text == "PNLSI") return ModelKind::PNLSI;
    throw std::invalid_argument("unknown model kind '" + text + "'");
}

LinkFunction make_link(const std::string& name, const Eigen::VectorXd& params) {
    LinkFunction link;
    link.name = name;
    if (name == "gauss_poly") {
        link.g = [](double u) { return (1.0 + u * u) * std::exp(-u * u); };
        // d/du (1+u^2) e^{-u^2} = 2u e^{-u^2} (1 - 1 - u^2) = -2u^3 e^{-u^2}
        link.dg = [](double u) { return -2.0 * u * u * u * std::exp(-u * u); };
    } else if (name == "gauss") {
        link.g = [](double u) { return std::exp(-u * u); };
        link.dg = [](double u) { return -2.0 * u * std::exp(-u * u); };
    } else if (name == "zero") {
        link.g = [](double) { return 0.0; };
        link.dg = [](double) { return 0.0; };
    } else if (name == "hermite") {
        if (params.size() == 0) throw std::invalid_argument("hermite link needs coefficients");
        SeriesLink series{params, SeriesLink::Origin::Projected};
        link.g = [series](double u) { return series(u); };
        link.dg = [series](double u) { return series.deriv(u); };
        link.params = params;
    } else {
        throw std::invalid_argument("unknown link '" + name + "'");
    }
    return link;
}

HRegularSpec make_hregular(const std::string& label) {
    if (label == "identity") {
        return {label, [](double u) { return u; }, [](double) { return 1.0; }};
    }
    if (label == "square") {
        return {label, [](double u) { return u * u; }, [](double u) { return 2.0 * u; }};
    }
    if (label == "zero") {
        return {label, [](double) { return 0.0; }, [](double) { return 0.0; }};
    }
    if (label == "cube") {
        return {label, [](double u) { return u * u * u; }, [](double u) { return 3.0 * u * u; }};
    }
    throw std::invalid_argument("unknown H-regular function '" + label + "'");
}

double hregular_derivative_gap(const HRegularSpec& spec, double span, int points) {
    constexpr double h = 1e-5;
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
        const double u = -span + 2.0 * span * i / (points - 1);
        const double fd = (spec.f(u + h) - spec.f(u - h)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - spec.fdot(u)));
    }
    return worst;
}

void ProcessConfig::validate() const {
    if (!(std::abs(r0) < 1.0)) throw std::invalid_argument("ProcessConfig: |r0| must be < 1");
    if (!(sigma >= 0.0)) throw std::invalid_argument("ProcessConfig: sigma must be >= 0");
    if (n < 1) throw std::invalid_argument("ProcessConfig: n must be >= 1");
    if (d < 1) throw std::invalid_argument("ProcessConfig: d must be >= 1");
    if (x0.size() != 0 && x0.size() != d) {
        throw std::invalid_argument("ProcessConfig: x0 has the wrong dimension");
    }
}

void ScenarioSpec::validate() const {
    process.validate();
    const int d = process.d;
    if (theta0.size() != d) throw std::invalid_argument("ScenarioSpec: theta0 dimension mismatch");
    if (std::abs(theta0.norm() - 1.0) > 1e-12) {
        throw std::invalid_argument("ScenarioSpec: theta0 must have unit norm");
    }
    for (int j = 0; j < d; ++j) {
        if (std::abs(theta0[j]) > 1e-10) {
            if (theta0[j] < 0) {
                throw std::invalid_argument("ScenarioSpec: first nonzero entry of theta0 must be positive");
            }
            break;
        }
    }
    if (kind != ModelKind::SI && beta0.size() != d) {
        throw std::invalid_argument("ScenarioSpec: beta0 dimension mismatch");
    }
    if (kind == ModelKind::PNLSI && !trend) {
        throw std::invalid_argument("ScenarioSpec: PNLSI needs an H-regular trend");
    }
    if (!link.g) throw std::invalid_argument("ScenarioSpec: link function missing");
    if (!(noise_sd >= 0.0)) throw std::invalid_argument("ScenarioSpec: noise_sd must be >= 0");
}

ScenarioSpec example51_part1() {
    ScenarioSpec s;
    s.name = "ex51-part1";
    s.kind = ModelKind::SI;
    s.theta0 = vec2(0.6, 0.8);
    s.link = make_link("gauss_poly");
    s.noise_sd = 1.0;
    s.process.d = 2;
    s.process.r0 = 0.1;
    s.process.sigma = 0.6;
    return s;
}

ScenarioSpec example51_part2() {
    ScenarioSpec s = example51_part1();
    s.name = "ex51-part2";
    s.theta0 = vec2(1.0, 0.0);
    return s;
}

ScenarioSpec example52() {
    ScenarioSpec s;
    s.name = "ex52";
    s.kind = ModelKind::PLSI;
    s.theta0 = vec2(0.6, -0.8);
    s.beta0 = vec2(0.3, 0.5);
    s.link = make_link("gauss_poly");
    s.noise_sd = 1.0;
    s.process.d = 2;
    s.process.r0 = 0.1;
    s.process.sigma = 0.8;
    return s;
}

std::optional<ScenarioSpec> builtin_scenario(const std::string& name) {
    if (name == "ex51-part1") return example51_part1();
    if (name == "ex51-part2") return example51_part2();
    if (name == "ex52") return example52();
    return std::nullopt;
}

Eigen::MatrixXd gen_integrated(const ProcessConfig& cfg) {
    cfg.validate();
    RandomStream rng(cfg.seed, kRegressorStream);
    Eigen::MatrixXd x(cfg.n, cfg.d);
    Eigen::VectorXd level = cfg.x0.size() ? cfg.x0 : Eigen::VectorXd::Zero(cfg.d);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(cfg.d);
    for (long t = 0; t < cfg.n; ++t) {
        for (int j = 0; j < cfg.d; ++j) {
            const double eps = cfg.sigma * rng.normal();
            v[j] = cfg.r0 * v[j] + eps;
            level[j] += v[j];
        }
        x.row(t) = level.transpose();
    }
    return x;
}

Eigen::VectorXd gen_response(const Eigen::MatrixXd& x, const ScenarioSpec& spec, std::uint64_t seed) {
    if (x.cols() != spec.theta0.size()) {
        throw std::invalid_argument("gen_response: regressor dimension does not match theta0");
    }
    if (spec.kind != ModelKind::SI && x.cols() != spec.beta0.size()) {
        throw std::invalid_argument("gen_response: regressor dimension does not match beta0");
    }
    RandomStream rng(seed, kNoiseStream);
    const Eigen::VectorXd index = x * spec.theta0;
    Eigen::VectorXd y(x.rows());
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
        double value = spec.link.g(index[t]);
        if (spec.kind == ModelKind::PLSI) {
            value += x.row(t).dot(spec.beta0);
        } else if (spec.kind == ModelKind::PNLSI) {
            value += spec.trend->f(x.row(t).dot(spec.beta0));
        }
        y[t] = value + spec.noise_sd * rng.normal();
    }
    return y;
}

std::uint64_t replication_seed(std::uint64_t base, std::uint64_t replication) {
    return derive_seed(base, 0x5eed0000ULL + replication);
}

}  // namespace hsim
