#include "hsim/hermite.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hsim {

namespace {

constexpr int kTableSize = 1024;

// a_i = sqrt(2 / (i + 1)), b_i = sqrt(i / (i + 1))
struct RecurrenceTable {
    std::array<double, kTableSize> a{};
    std::array<double, kTableSize> b{};
    RecurrenceTable() {
        for (int i = 0; i < kTableSize; ++i) {
            a[i] = std::sqrt(2.0 / (i + 1.0));
            b[i] = std::sqrt(i / (i + 1.0));
        }
    }
};

const RecurrenceTable& table() {
    static const RecurrenceTable t;
    return t;
}

inline double coef_a(int i) { return i < kTableSize ? table().a[i] : std::sqrt(2.0 / (i + 1.0)); }
inline double coef_b(int i) { return i < kTableSize ? table().b[i] : std::sqrt(i / (i + 1.0)); }

// pi^{-1/4}
const double kH0Scale = std::pow(std::numbers::pi, -0.25);

// Below this |u| the Gaussian seed stays a normal double.
constexpr double kPlainLimit = 36.0;

// Beyond this |u|, u^i exp(-u^2/2) is below the smallest double for every supported order.
constexpr double kZeroLimit = 1e100;

void scaled_recurrence(int k, double u, double* out) {
    double log_scale = -0.5 * u * u - 0.25 * std::log(std::numbers::pi);
    double factor = std::exp(log_scale);
    double prev = 0.0;
    double cur = 1.0;
    out[0] = factor;
    for (int i = 0; i + 1 < k; ++i) {
        const double next = u * coef_a(i) * cur - coef_b(i) * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > 1e250) {
            prev *= 1e-250;
            cur *= 1e-250;
            log_scale += 250.0 * std::numbers::ln10;
            factor = std::exp(log_scale);
        }
        out[i + 1] = cur * factor;
    }
}

}  // namespace

void hermite_values(int k, double u, double* out) {
    if (k <= 0) return;
    if (std::abs(u) >= kZeroLimit) {
        std::fill(out, out + k, 0.0);
        return;
    }
    if (std::abs(u) >= kPlainLimit) {
        scaled_recurrence(k, u, out);
        return;
    }
    out[0] = kH0Scale * std::exp(-0.5 * u * u);
    if (k == 1) return;
    out[1] = std::numbers::sqrt2 * u * out[0];
    for (int i = 1; i + 1 < k; ++i) {
        out[i + 1] = u * coef_a(i) * out[i] - coef_b(i) * out[i - 1];
    }
}

double hermite_function(int i, double x) {
    if (i < 0) throw std::domain_error("hermite_function: negative order");
    std::vector<double> buf(static_cast<std::size_t>(i) + 1);
    hermite_values(i + 1, x, buf.data());
    return buf.back();
}

double hermite_function_deriv(int i, double x) {
    if (i < 0) throw std::domain_error("hermite_function_deriv: negative order");
    std::vector<double> buf(static_cast<std::size_t>(i) + 2);
    hermite_values(i + 2, x, buf.data());
    const double lower = i > 0 ? std::sqrt(i / 2.0) * buf[i - 1] : 0.0;
    return lower - std::sqrt((i + 1) / 2.0) * buf[i + 1];
}

BasisEval basis_vector(int k, double u, bool with_derivs) {
    if (k < 1) throw std::invalid_argument("basis_vector: k must be positive");
    BasisEval out;
    out.k = k;
    out.point = u;
    Eigen::VectorXd ext(k + 1);
    hermite_values(k + 1, u, ext.data());
    out.values = ext.head(k);
    if (with_derivs) {
        Eigen::VectorXd d(k);
        for (int i = 0; i < k; ++i) {
            const double lower = i > 0 ? std::sqrt(i / 2.0) * ext[i - 1] : 0.0;
            d[i] = lower - std::sqrt((i + 1) / 2.0) * ext[i + 1];
        }
        out.derivs = std::move(d);
    }
    return out;
}

double SeriesLink::operator()(double u) const {
    const int k = this->k();
    if (k == 0) return 0.0;
    Eigen::VectorXd z(k);
    hermite_values(k, u, z.data());
    return z.dot(coeffs);
}

double SeriesLink::deriv(double u) const {
    const int k = this->k();
    if (k == 0) return 0.0;
    return basis_vector(k, u, true).derivs->dot(coeffs);
}

void gauss_legendre(int nodes, Eigen::VectorXd& x, Eigen::VectorXd& w) {
    if (nodes < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
    x.resize(nodes);
    w.resize(nodes);
    // returns {P_n(z), P_n'(z)}
    auto legendre = [nodes](double z) {
        double p0 = 1.0;
        double p1 = z;
        for (int j = 2; j <= nodes; ++j) {
            const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        if (nodes == 1) p0 = 1.0;
        return std::pair{p1, nodes * (z * p1 - p0) / (z * z - 1.0)};
    };
    const int half = (nodes + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (nodes + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(z);
            const double dz = p / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double dp = legendre(z).second;
        x[i] = -z;
        x[nodes - 1 - i] = z;
        w[i] = w[nodes - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    if (nodes % 2 == 1) x[nodes / 2] = 0.0;
}

double integrate(const std::function<double(double)>& f, const QuadratureRule& rule) {
    Eigen::VectorXd x, w;
    gauss_legendre(rule.nodes, x, w);
    const double width = 2.0 * rule.half_width / rule.panels;
    double total = 0.0;
    for (int p = 0; p < rule.panels; ++p) {
        const double mid = -rule.half_width + (p + 0.5) * width;
        double panel = 0.0;
        for (int j = 0; j < rule.nodes; ++j) panel += w[j] * f(mid + 0.5 * width * x[j]);
        total += 0.5 * width * panel;
    }
    return total;
}

SeriesLink project(const std::function<double(double)>& g, int k, const QuadratureRule& rule) {
    if (k < 1) throw std::invalid_argument("project: k must be positive");
    Eigen::VectorXd x, w;
    gauss_legendre(rule.nodes, x, w);
    const double width = 2.0 * rule.half_width / rule.panels;
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd z(k);
    for (int p = 0; p < rule.panels; ++p) {
        const double mid = -rule.half_width + (p + 0.5) * width;
        for (int j = 0; j < rule.nodes; ++j) {
            const double u = mid + 0.5 * width * x[j];
            const double gu = g(u);
            if (!std::isfinite(gu)) {
                throw std::domain_error("project: link evaluated to a non-finite value at u = " +
                                        std::to_string(u));
            }
            hermite_values(k, u, z.data());
            coeffs += (0.5 * width * w[j] * gu) * z;
        }
    }
    return SeriesLink{std::move(coeffs), SeriesLink::Origin::Projected};
}

int truncation_k(long n, double a, double kappa) {
    if (n < 2) throw std::invalid_argument("truncation_k: n must be at least 2");
    const double k = std::floor(a * std::pow(static_cast<double>(n), kappa));
    return k < 1.0 ? 1 : static_cast<int>(k);
}

}  // namespace hsim
