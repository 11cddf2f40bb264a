#include "hsim/estimators.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hsim/inference.hpp"
#include "hsim/rng.hpp"

namespace hsim {

namespace {

int default_starts(int d) { return d == 1 ? 1 : (d == 2 ? 16 : 64); }

// Radical inverse of i in the given prime base.
double halton(long i, int base) {
    double f = 1.0;
    double r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

// Everything the outer search needs for one data set.
class Profile {
public:
    Profile(ModelKind kind, const Eigen::VectorXd& y, const Eigen::MatrixXd& x, int k, const FitOptions& opts,
            const std::optional<HRegularSpec>& trend)
        : kind_(kind), y_(y), x_(x), k_(k), opts_(opts), trend_(trend) {
        if (y.size() != x.rows()) throw std::invalid_argument("fit: y and x row counts differ");
        if (x.cols() < 1) throw std::invalid_argument("fit: need at least one regressor");
        if (k < 1) throw std::invalid_argument("fit: k must be positive");
        const long needed = k + (kind == ModelKind::PLSI ? x.cols() : 0);
        if (y.size() <= needed) throw std::invalid_argument("fit: need n > k (+ d for plsi)");
        if (kind == ModelKind::PNLSI && !trend) throw std::invalid_argument("fit: pnlsi needs f");
        if (kind == ModelKind::PLSI) {
            null_rss_ = (y - x * x.colPivHouseholderQr().solve(y)).squaredNorm();
        } else {
            null_rss_ = y.squaredNorm();
        }
    }

    int d() const { return static_cast<int>(x_.cols()); }

    // Response after removing the known trend f(beta' x).
    Eigen::VectorXd detrended(const Eigen::VectorXd& beta) const {
        Eigen::VectorXd r = y_;
        const Eigen::VectorXd idx = x_ * beta;
        for (Eigen::Index t = 0; t < r.size(); ++t) r[t] -= trend_->f(idx[t]);
        return r;
    }

    InnerSolve solve(const Eigen::VectorXd& theta, const Eigen::VectorXd* beta) const {
        const DesignMatrix z = design(x_, theta, k_);
        switch (kind_) {
            case ModelKind::SI: return inner_ols(y_, z, nullptr, opts_.inner);
            case ModelKind::PLSI: return inner_ols(y_, z, &x_, opts_.inner);
            case ModelKind::PNLSI: return inner_ols(detrended(*beta), z, nullptr, opts_.inner);
        }
        throw std::logic_error("unreachable");
    }

    double objective(const Eigen::VectorXd& theta, const Eigen::VectorXd* beta) const {
        double charge = null_rss_;
        if (kind_ == ModelKind::PNLSI) charge = detrended(*beta).squaredNorm();
        const double excess = theta.lpNorm<Eigen::Infinity>() - opts_.theta_box;
        if (excess > 0 || !theta.allFinite()) {
            return 0.5 * charge * (1.0 + (std::isfinite(excess) ? excess : 1e6));
        }
        const InnerSolve s = solve(theta, beta);
        return 0.5 * (s.rss + s.penalty);
    }

    // Outer parameter vector: theta, or [beta; theta] for PNLSI.
    double outer(const Eigen::VectorXd& p) const {
        if (kind_ == ModelKind::PNLSI) {
            const Eigen::VectorXd beta = p.head(d());
            return objective(p.tail(d()), &beta);
        }
        return objective(p, nullptr);
    }

    FitResult finish(const Eigen::VectorXd& best, OptTrace trace) const {
        FitResult r;
        r.kind = kind_;
        r.n = y_.size();
        r.k = k_;
        r.trend = trend_;
        Eigen::VectorXd theta = kind_ == ModelKind::PNLSI ? Eigen::VectorXd(best.tail(d())) : best;
        Eigen::VectorXd beta = kind_ == ModelKind::PNLSI ? Eigen::VectorXd(best.head(d())) : Eigen::VectorXd();
        // theta and -theta span the same series design; report the canonical sign.
        r.theta_emp = sign_fix(theta);
        if (r.theta_emp.dot(theta) < 0) theta = -theta;
        r.theta_hat = theta;
        const InnerSolve s = solve(theta, kind_ == ModelKind::PNLSI ? &beta : nullptr);
        r.link = SeriesLink{s.coeffs, SeriesLink::Origin::Fitted};
        if (kind_ == ModelKind::PLSI) r.beta_hat = s.linear;
        if (kind_ == ModelKind::PNLSI) r.beta_hat = beta;
        r.objective = 0.5 * s.rss;
        r.inner_cond = s.cond;
        r.trace = std::move(trace);
        if (opts_.inference) {
            r.sigma2_hat = sigma2_hat(y_, x_, r);
            r.local_time_hat = local_time_hat(x_, r.theta_hat);
            const ThetaCovariance cov = theta_cov(y_, x_, r);
            r.theta_cov = cov.cov;
            r.hessian_singular = cov.singular;
        }
        return r;
    }

private:
    ModelKind kind_;
    const Eigen::VectorXd& y_;
    const Eigen::MatrixXd& x_;
    int k_;
    const FitOptions& opts_;
    std::optional<HRegularSpec> trend_;
    double null_rss_ = 0.0;
};

FitResult multistart(const Profile& profile, const std::vector<Eigen::VectorXd>& starts, const FitOptions& opts) {
    OptTrace trace;
    Eigen::VectorXd best;
    double best_f = std::numeric_limits<double>::infinity();
    auto f = [&profile](const Eigen::VectorXd& p) { return profile.outer(p); };
    for (std::size_t s = 0; s < starts.size(); ++s) {
        const NelderMeadResult res = nelder_mead(f, starts[s], opts.nm);
        trace.iterations += res.iterations;
        trace.evaluations += res.evaluations;
        trace.converged = trace.converged || res.converged;
        // Ties within 1e-12 keep the earlier start.
        if (best.size() == 0 || res.f < best_f - 1e-12 * (1.0 + std::abs(best_f))) {
            best = res.x;
            best_f = res.f;
            trace.best_start = static_cast<int>(s);
        }
        trace.best_so_far.push_back(best_f);
    }
    trace.restarts = static_cast<int>(starts.size());
    return profile.finish(best, std::move(trace));
}

std::vector<Eigen::VectorXd> theta_starts(int d, const FitOptions& opts) {
    std::vector<Eigen::VectorXd> starts;
    if (opts.theta_start) {
        if (opts.theta_start->size() != d) throw std::invalid_argument("fit: theta_start dimension mismatch");
        starts.push_back(*opts.theta_start);
    }
    if (opts.sphere_grid || starts.empty()) {
        for (auto& s : sphere_starts(d, opts.starts > 0 ? opts.starts : default_starts(d))) starts.push_back(s);
    }
    return starts;
}

}  // namespace

Eigen::VectorXd sign_fix(const Eigen::VectorXd& theta) {
    const double norm = theta.norm();
    if (!(norm > 0)) throw std::invalid_argument("sign_fix: zero vector");
    Eigen::VectorXd out = theta / norm;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        if (std::abs(theta[j]) > 1e-10) {
            if (theta[j] < 0) out = -out;
            break;
        }
    }
    return out;
}

std::vector<Eigen::VectorXd> sphere_starts(int d, int count) {
    if (d < 1 || count < 1) throw std::invalid_argument("sphere_starts: need d >= 1 and count >= 1");
    std::vector<Eigen::VectorXd> out;
    if (d == 1) {
        out.push_back(Eigen::VectorXd::Ones(1));
        return out;
    }
    if (d == 2) {
        // angles in (-pi/2, pi/2]
        for (int j = 0; j < count; ++j) {
            const double phi = -std::numbers::pi / 2 + std::numbers::pi * (j + 1) / count;
            Eigen::VectorXd v(2);
            v << std::cos(phi), std::sin(phi);
            out.push_back(sign_fix(v));
        }
        return out;
    }
    if (d > static_cast<int>(std::size(kPrimes))) throw std::invalid_argument("sphere_starts: d too large");
    // Halton points pushed through the normal quantile are uniform on the sphere.
    for (int j = 0; j < count; ++j) {
        Eigen::VectorXd v(d);
        for (int c = 0; c < d; ++c) v[c] = normal_quantile(halton(j + 1, kPrimes[c]));
        out.push_back(sign_fix(v));
    }
    return out;
}

double objective_si(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& theta, int k,
                    const FitOptions& opts) {
    return Profile(ModelKind::SI, y, x, k, opts, std::nullopt).objective(theta, nullptr);
}

double objective_plsi(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& theta, int k,
                      const FitOptions& opts) {
    return Profile(ModelKind::PLSI, y, x, k, opts, std::nullopt).objective(theta, nullptr);
}

double objective_pnlsi(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const HRegularSpec& f,
                       const Eigen::VectorXd& beta, const Eigen::VectorXd& theta, int k, const FitOptions& opts) {
    return Profile(ModelKind::PNLSI, y, x, k, opts, f).objective(theta, &beta);
}

FitResult fit_si(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, int k, const FitOptions& opts) {
    const Profile profile(ModelKind::SI, y, x, k, opts, std::nullopt);
    return multistart(profile, theta_starts(profile.d(), opts), opts);
}

FitResult fit_plsi(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, int k, const FitOptions& opts) {
    const Profile profile(ModelKind::PLSI, y, x, k, opts, std::nullopt);
    return multistart(profile, theta_starts(profile.d(), opts), opts);
}

FitResult fit_pnlsi(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const HRegularSpec& f, int k,
                    const FitOptions& opts) {
    const Profile profile(ModelKind::PNLSI, y, x, k, opts, f);
    const int d = profile.d();

    // The partially linear fit seeds the trend coefficients; for f(u) = u it is
    // already the profile optimum over beta.
    FitOptions lin_opts = opts;
    lin_opts.inference = false;
    lin_opts.beta_start.reset();
    const FitResult lin = fit_plsi(y, x, k, lin_opts);

    auto stack = [d](const Eigen::VectorXd& beta, const Eigen::VectorXd& theta) {
        Eigen::VectorXd p(2 * d);
        p << beta, theta;
        return p;
    };
    std::vector<Eigen::VectorXd> starts;
    if (opts.beta_start || opts.theta_start) {
        const Eigen::VectorXd beta = opts.beta_start ? *opts.beta_start : lin.beta_hat;
        const Eigen::VectorXd theta = opts.theta_start ? *opts.theta_start : lin.theta_hat;
        if (beta.size() != d || theta.size() != d) throw std::invalid_argument("fit_pnlsi: start dimension mismatch");
        starts.push_back(stack(beta, theta));
    }
    starts.push_back(stack(lin.beta_hat, lin.theta_hat));
    for (auto& dir : sphere_starts(d, opts.starts > 0 ? opts.starts : default_starts(d))) {
        starts.push_back(stack(lin.beta_hat, dir));
    }
    return multistart(profile, starts, opts);
}

FitResult fit_model(ModelKind kind, const Eigen::VectorXd& y, const Eigen::MatrixXd& x, int k,
                    const FitOptions& opts, const std::optional<HRegularSpec>& f) {
    switch (kind) {
        case ModelKind::SI: return fit_si(y, x, k, opts);
        case ModelKind::PLSI: return fit_plsi(y, x, k, opts);
        case ModelKind::PNLSI:
            if (!f) throw std::invalid_argument("fit_model: pnlsi needs f");
            return fit_pnlsi(y, x, *f, k, opts);
    }
    throw std::logic_error("unreachable");
}

Eigen::VectorXd fitted_values(const FitResult& fit, const Eigen::MatrixXd& x) {
    const Eigen::VectorXd index = x * fit.theta_hat;
    Eigen::VectorXd out(x.rows());
    const DesignMatrix z = design_from_index(index, fit.link.k());
    out = z.z * fit.link.coeffs;
    if (fit.kind == ModelKind::PLSI) {
        out += x * fit.beta_hat;
    } else if (fit.kind == ModelKind::PNLSI) {
        const Eigen::VectorXd trend_index = x * fit.beta_hat;
        for (Eigen::Index t = 0; t < out.size(); ++t) out[t] += fit.trend->f(trend_index[t]);
    }
    return out;
}

}  // namespace hsim
