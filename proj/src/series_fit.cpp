#include "hsim/series_fit.hpp"

#include <cmath>
#include <limits>

namespace hsim {

DesignMatrix design_from_index(const Eigen::VectorXd& index, int k) {
    if (k < 1) throw std::invalid_argument("design: k must be positive");
    // Row-major scratch keeps each recurrence pass contiguous.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(index.size(), k);
    for (Eigen::Index t = 0; t < index.size(); ++t) hermite_values(k, index[t], rows.row(t).data());
    return DesignMatrix{rows};
}

DesignMatrix design(const Eigen::MatrixXd& x, const Eigen::VectorXd& theta, int k) {
    if (x.cols() != theta.size()) throw std::invalid_argument("design: theta dimension mismatch");
    return design_from_index(x * theta, k);
}

InnerSolve inner_ols(const Eigen::VectorXd& y, const DesignMatrix& z, const Eigen::MatrixXd* x,
                     const InnerOptions& opts) {
    const Eigen::Index n = z.rows();
    const Eigen::Index k = z.cols();
    const Eigen::Index d = x ? x->cols() : 0;
    const Eigen::Index p = d + k;
    if (y.size() != n || (x && x->rows() != n)) {
        throw std::invalid_argument("inner_ols: row count mismatch");
    }
    if (n <= p) throw std::invalid_argument("inner_ols: need more observations than coefficients");

    Eigen::MatrixXd a(n, p);
    if (x) a.leftCols(d) = *x;
    a.rightCols(k) = z.z;

    Eigen::VectorXd scale = a.colwise().norm().transpose();
    InnerSolve out;
    double ridge_lambda = 0.0;
    bool degenerate = (scale.array() == 0.0).any();
    Eigen::VectorXd coef;
    if (!degenerate) {
        a.array().rowwise() /= scale.transpose().array();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
        const double smin = sv[p - 1];
        out.cond = smin > 0 ? (sv[0] / smin) * (sv[0] / smin) : std::numeric_limits<double>::infinity();
        degenerate = !(out.cond <= opts.cond_limit);
        if (!degenerate) {
            Eigen::VectorXd qty = qr.householderQ().adjoint() * y;
            coef = r.triangularView<Eigen::Upper>().solve(qty.head(p));
            coef.array() /= scale.array();
        }
    } else {
        out.cond = std::numeric_limits<double>::infinity();
    }

    if (degenerate) {
        if (!opts.ridge_fallback) throw RankDeficient(out.cond);
        out.ridge = true;
        a.leftCols(d) = x ? *x : Eigen::MatrixXd(n, 0);
        a.rightCols(k) = z.z;
        const double trace = z.z.squaredNorm();
        const double lambda = opts.ridge_scale * trace / static_cast<double>(k);
        ridge_lambda = lambda;
        coef = Eigen::VectorXd::Zero(p);
        if (lambda > 0.0) {
            // Ridge on the series block: augment with sqrt(lambda) I rows.
            Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + k, p);
            aug.topRows(n) = a;
            aug.bottomRightCorner(k, k).diagonal().setConstant(std::sqrt(lambda));
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
            rhs.head(n) = y;
            coef = aug.colPivHouseholderQr().solve(rhs);
        } else if (d > 0) {
            // Series block vanishes identically; only the linear part is estimable.
            coef.head(d) = x->colPivHouseholderQr().solve(y);
        }
    }

    if (x) {
        out.linear = coef.head(d);
        out.coeffs = coef.tail(k);
        out.rss = (y - *x * out.linear - z.z * out.coeffs).squaredNorm();
    } else {
        out.coeffs = coef;
        out.rss = (y - z.z * out.coeffs).squaredNorm();
    }
    if (out.ridge) out.penalty = ridge_lambda * out.coeffs.squaredNorm();
    return out;
}

double plugin_g(const SeriesLink& link, double u) { return link(u); }

double plugin_g_deriv(const SeriesLink& link, double u) { return link.deriv(u); }

}  // namespace hsim
