#include "hsim/selection.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hsim {

double gcv_score(double sigma2, int k, long n) {
    const double shrink = 1.0 - static_cast<double>(k) / static_cast<double>(n);
    return sigma2 / (shrink * shrink);
}

std::vector<int> default_gcv_candidates() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}; }

GcvTable gcv_select(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, ModelKind kind,
                    const std::vector<int>& candidates, const GcvOptions& opts,
                    const std::optional<HRegularSpec>& f) {
    if (candidates.empty()) throw std::invalid_argument("gcv_select: no candidates");
    const long n = y.size();
    for (int k : candidates) {
        if (k < 1 || 2L * k >= n) throw std::invalid_argument("gcv_select: candidates must satisfy 1 <= k < n/2");
    }

    GcvTable table;
    table.n = n;
    table.candidates = candidates;
    FitOptions fit_opts = opts.fit;
    fit_opts.inference = false;
    for (int k : candidates) {
        GcvEntry entry;
        entry.k = k;
        try {
            const FitResult fit = fit_model(kind, y, x, k, fit_opts, f);
            entry.sigma2 = 2.0 * fit.objective / static_cast<double>(n);
            entry.score = gcv_score(entry.sigma2, k, n);
            entry.theta_hat = fit.theta_hat;
            entry.beta_hat = fit.beta_hat;
            entry.objective = fit.objective;
            if (!std::isfinite(entry.score)) entry.failed = true;
            if (opts.warm_start) fit_opts.theta_start = fit.theta_hat;
        } catch (const std::exception&) {
            entry.failed = true;
        }
        if (entry.failed) {
            entry.score = std::numeric_limits<double>::infinity();
            entry.sigma2 = std::numeric_limits<double>::quiet_NaN();
        }
        table.scores.push_back(entry.score);
        table.fits.push_back(std::move(entry));
    }

    double best = std::numeric_limits<double>::infinity();
    for (double s : table.scores) best = std::min(best, s);
    const double tol = opts.tie_rel_tol * y.squaredNorm() / static_cast<double>(n);
    table.chosen = candidates.front();
    int chosen = -1;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (table.scores[i] <= best + tol && (chosen < 0 || candidates[i] < chosen)) chosen = candidates[i];
    }
    if (chosen > 0) table.chosen = chosen;
    return table;
}

}  // namespace hsim
