#include "hsim/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace hsim {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const NelderMeadOptions& opts) {
    const Eigen::Index dim = start.size();
    const double norm = start.norm();
    const double step = opts.initial_step * (norm > 0 ? norm : 1.0);

    std::vector<Eigen::VectorXd> pts(dim + 1, start);
    std::vector<double> vals(dim + 1);
    for (Eigen::Index i = 0; i < dim; ++i) pts[i + 1][i] += step;

    NelderMeadResult res;
    auto eval = [&](const Eigen::VectorXd& p) {
        ++res.evaluations;
        const double v = f(p);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    for (Eigen::Index i = 0; i <= dim; ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(dim + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::vector<Eigen::VectorXd> p2(dim + 1);
        std::vector<double> v2(dim + 1);
        for (std::size_t i = 0; i < order.size(); ++i) {
            p2[i] = std::move(pts[order[i]]);
            v2[i] = vals[order[i]];
        }
        pts = std::move(p2);
        vals = std::move(v2);
    };

    sort_simplex();
    while (res.iterations < opts.max_iter) {
        const double spread = vals[dim] - vals[0];
        if (std::isfinite(spread) && spread < opts.ftol * (1.0 + std::abs(vals[0]))) {
            res.converged = true;
            break;
        }
        ++res.iterations;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (Eigen::Index i = 0; i < dim; ++i) centroid += pts[i];
        centroid /= static_cast<double>(dim);

        const Eigen::VectorXd reflected = centroid + (centroid - pts[dim]);
        const double fr = eval(reflected);
        if (fr < vals[0]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[dim]);
            const double fe = eval(expanded);
            if (fe < fr) {
                pts[dim] = expanded;
                vals[dim] = fe;
            } else {
                pts[dim] = reflected;
                vals[dim] = fr;
            }
        } else if (fr < vals[dim - 1]) {
            pts[dim] = reflected;
            vals[dim] = fr;
        } else {
            const bool outside = fr < vals[dim];
            const Eigen::VectorXd contracted =
                outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                        : Eigen::VectorXd(centroid + 0.5 * (pts[dim] - centroid));
            const double fc = eval(contracted);
            if (fc < (outside ? fr : vals[dim])) {
                pts[dim] = contracted;
                vals[dim] = fc;
            } else {
                for (Eigen::Index i = 1; i <= dim; ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    vals[i] = eval(pts[i]);
                }
            }
        }
        sort_simplex();
    }
    res.x = pts[0];
    res.f = vals[0];
    return res;
}

}  // namespace hsim
