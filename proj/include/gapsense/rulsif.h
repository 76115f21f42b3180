#pragma once

// Relative unconstrained least-squares importance fitting.
//
// Fits g(x) = sum_l theta_l * exp(-|x - c_l|^2 / (2 sigma^2)) to the
// alpha-relative density ratio
//
//     r(x) = p(x) / (alpha p(x) + (1 - alpha) q(x))
//
// where p is the numerator sample and q the denominator sample, and plugs the
// fit into the alpha-relative Pearson divergence estimator
//
//     PE = -alpha/(2n) sum g(x_i)^2 - (1-alpha)/(2m) sum g(y_j)^2
//          + 1/n sum g(x_i) - 1/2.
//
// Samples are stored column-wise (d x n).

#include "gapsense/types.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace gapsense {

struct RatioFitOptions {
    double alpha = 0.1;
    int n_kernel_centers = 50;
    /// Multipliers applied to the median pairwise distance of the centers.
    std::vector<double> sigma_scales{0.6, 0.8, 1.0, 1.2, 1.4};
    /// Absolute kernel widths. When non-empty they replace the median heuristic.
    std::vector<double> sigma_candidates;
    std::vector<double> lambda_candidates{1e-3, 1e-2, 1e-1, 1.0};
    int cv_folds = 5;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct RatioFit {
    double sigma = 0.0;
    double lambda = 0.0;
    Eigen::VectorXd theta;
    Eigen::MatrixXd centers;
    /// Unclamped PE estimate on the fitting samples.
    double pe = 0.0;
    bool degenerate = false;
};

struct PeScore {
    double value = 0.0;
    bool degenerate = false;
};

namespace detail {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Squared Euclidean distances between the columns of `a` and `b` (a.cols() x b.cols()).
template <typename DA, typename DB>
Mat<typename DA::Scalar> squared_distances(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
    using Scalar = typename DA::Scalar;
    const Vec<Scalar> an = a.colwise().squaredNorm().transpose();
    const Vec<Scalar> bn = b.colwise().squaredNorm().transpose();
    Mat<Scalar> d = (-2 * (a.transpose() * b)).eval();
    d.colwise() += an;
    d.rowwise() += bn.transpose();
    return d.cwiseMax(Scalar(0));
}

template <typename Scalar>
Scalar median_nonzero(std::vector<Scalar> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](Scalar x) { return !(x > Scalar(0)); }), v.end());
    if (v.empty()) {
        return Scalar(0);
    }
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) {
        return *mid;
    }
    const Scalar upper = *mid;
    const Scalar lower = *std::max_element(v.begin(), mid);
    return (lower + upper) / Scalar(2);
}

/// Median pairwise (upper-triangle) Euclidean distance between columns, zeros excluded.
template <typename D>
typename D::Scalar median_pairwise_distance(const Eigen::MatrixBase<D>& x) {
    using Scalar = typename D::Scalar;
    const Mat<Scalar> d2 = squared_distances(x, x);
    std::vector<Scalar> v;
    v.reserve(static_cast<std::size_t>(x.cols() * (x.cols() - 1) / 2));
    for (Eigen::Index j = 1; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            v.push_back(std::sqrt(d2(i, j)));
        }
    }
    return median_nonzero(std::move(v));
}

template <typename Scalar>
Mat<Scalar> gaussian_from_sq(const Mat<Scalar>& d2, Scalar sigma) {
    const Scalar s = Scalar(-1) / (Scalar(2) * sigma * sigma);
    return (d2.array() * s).exp().matrix();
}

template <typename Scalar>
Mat<Scalar> rows_of(const Mat<Scalar>& m, const std::vector<Eigen::Index>& rows) {
    Mat<Scalar> out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    }
    return out;
}

/// PE estimate given kernel design matrices of the numerator (n x b) and
/// denominator (m x b) samples and coefficients theta.
template <typename Scalar>
Scalar pe_from_design(const Mat<Scalar>& kn, const Mat<Scalar>& kd, const Vec<Scalar>& theta, Scalar alpha) {
    const Vec<Scalar> gn = kn * theta;
    const Vec<Scalar> gd = kd * theta;
    const auto n = static_cast<Scalar>(kn.rows());
    const auto m = static_cast<Scalar>(kd.rows());
    return -alpha / (Scalar(2) * n) * gn.squaredNorm() - (Scalar(1) - alpha) / (Scalar(2) * m) * gd.squaredNorm() +
           gn.sum() / n - Scalar(0.5);
}

/// Held-out least-squares loss of the relative ratio model.
template <typename Scalar>
Scalar holdout_loss(const Mat<Scalar>& kn, const Mat<Scalar>& kd, const Vec<Scalar>& theta, Scalar alpha) {
    const Vec<Scalar> gn = kn * theta;
    const Vec<Scalar> gd = kd * theta;
    const auto n = static_cast<Scalar>(kn.rows());
    const auto m = static_cast<Scalar>(kd.rows());
    return alpha / (Scalar(2) * n) * gn.squaredNorm() + (Scalar(1) - alpha) / (Scalar(2) * m) * gd.squaredNorm() -
           gn.sum() / n;
}

/// Eigen-decomposed normal equations; solves (H + lambda I) theta = h for many lambdas.
template <typename Scalar>
class RegularizedSystem {
public:
    RegularizedSystem(const Mat<Scalar>& kn, const Mat<Scalar>& kd, Scalar alpha) {
        const auto n = static_cast<Scalar>(kn.rows());
        const auto m = static_cast<Scalar>(kd.rows());
        const Mat<Scalar> h_mat =
            (alpha / n) * (kn.transpose() * kn) + ((Scalar(1) - alpha) / m) * (kd.transpose() * kd);
        solver_.compute(h_mat);
        rhs_ = solver_.eigenvectors().transpose() * (kn.transpose() * Vec<Scalar>::Ones(kn.rows()) / n);
    }

    Vec<Scalar> solve(Scalar lambda) const {
        const Vec<Scalar> d = solver_.eigenvalues().cwiseMax(Scalar(0)).array() + lambda;
        return solver_.eigenvectors() * rhs_.cwiseQuotient(d);
    }

private:
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver_;
    Vec<Scalar> rhs_;
};

} // namespace detail

/// Fits the alpha-relative density ratio numer/denom with kernel width and
/// regularization chosen by k-fold cross-validation.
template <typename DN, typename DD>
RatioFit fit_relative_density_ratio(const Eigen::MatrixBase<DN>& numer, const Eigen::MatrixBase<DD>& denom,
                                    const RatioFitOptions& opt) {
    using Scalar = typename DN::Scalar;
    using detail::Mat;
    using detail::Vec;
    opt.validate();
    if (numer.cols() == 0 || denom.cols() == 0) {
        throw SizeError("density ratio fitting needs non-empty sample sets");
    }
    if (numer.rows() != denom.rows()) {
        throw ValidationError("sample sets differ in dimensionality");
    }
    if (!numer.allFinite() || !denom.allFinite()) {
        throw ValidationError("sample sets contain non-finite values");
    }

    const Mat<Scalar> x = numer;
    const Mat<Scalar> y = denom.template cast<Scalar>();
    const Eigen::Index n = x.cols();
    const Eigen::Index m = y.cols();
    const auto alpha = static_cast<Scalar>(opt.alpha);

    std::mt19937_64 rng(opt.rng_seed);

    // Kernel centers: the numerator sample, subsampled when larger than requested.
    std::vector<Eigen::Index> center_idx(static_cast<std::size_t>(n));
    std::iota(center_idx.begin(), center_idx.end(), Eigen::Index{0});
    const auto b = std::min<Eigen::Index>(n, opt.n_kernel_centers);
    if (b < n) {
        std::shuffle(center_idx.begin(), center_idx.end(), rng);
        center_idx.resize(static_cast<std::size_t>(b));
        std::sort(center_idx.begin(), center_idx.end());
    }
    Mat<Scalar> centers(x.rows(), b);
    for (Eigen::Index l = 0; l < b; ++l) {
        centers.col(l) = x.col(center_idx[static_cast<std::size_t>(l)]);
    }

    RatioFit fit;
    fit.centers = centers.template cast<double>();

    std::vector<Scalar> sigmas;
    if (!opt.sigma_candidates.empty()) {
        for (double s : opt.sigma_candidates) {
            sigmas.push_back(static_cast<Scalar>(s));
        }
    } else {
        Scalar base = detail::median_pairwise_distance(centers);
        if (!(base > Scalar(0))) {
            Mat<Scalar> pooled(x.rows(), n + m);
            pooled << x, y;
            base = detail::median_pairwise_distance(pooled);
        }
        if (!(base > Scalar(0))) {
            fit.degenerate = true;
            fit.theta = Eigen::VectorXd::Zero(b);
            return fit;
        }
        for (double s : opt.sigma_scales) {
            sigmas.push_back(base * static_cast<Scalar>(s));
        }
    }

    const Mat<Scalar> dx = detail::squared_distances(x, centers);
    const Mat<Scalar> dy = detail::squared_distances(y, centers);

    const auto folds = std::min<Eigen::Index>({static_cast<Eigen::Index>(opt.cv_folds), n, m});
    std::size_t best_sigma = 0;
    std::size_t best_lambda = 0;
    if (folds >= 2 && sigmas.size() * opt.lambda_candidates.size() > 1) {
        std::vector<Eigen::Index> px(static_cast<std::size_t>(n));
        std::vector<Eigen::Index> py(static_cast<std::size_t>(m));
        std::iota(px.begin(), px.end(), Eigen::Index{0});
        std::iota(py.begin(), py.end(), Eigen::Index{0});
        std::shuffle(px.begin(), px.end(), rng);
        std::shuffle(py.begin(), py.end(), rng);

        struct Split {
            std::vector<Eigen::Index> xtr, xte, ytr, yte;
        };
        std::vector<Split> splits(static_cast<std::size_t>(folds));
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < folds; ++k) {
                auto& s = splits[static_cast<std::size_t>(k)];
                (i % folds == k ? s.xte : s.xtr).push_back(px[static_cast<std::size_t>(i)]);
            }
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index k = 0; k < folds; ++k) {
                auto& s = splits[static_cast<std::size_t>(k)];
                (j % folds == k ? s.yte : s.ytr).push_back(py[static_cast<std::size_t>(j)]);
            }
        }

        Scalar best = std::numeric_limits<Scalar>::infinity();
        for (std::size_t si = 0; si < sigmas.size(); ++si) {
            const Mat<Scalar> kx = detail::gaussian_from_sq(dx, sigmas[si]);
            const Mat<Scalar> ky = detail::gaussian_from_sq(dy, sigmas[si]);
            std::vector<Scalar> loss(opt.lambda_candidates.size(), Scalar(0));
            for (const auto& s : splits) {
                const Mat<Scalar> kx_tr = detail::rows_of(kx, s.xtr);
                const Mat<Scalar> ky_tr = detail::rows_of(ky, s.ytr);
                const Mat<Scalar> kx_te = detail::rows_of(kx, s.xte);
                const Mat<Scalar> ky_te = detail::rows_of(ky, s.yte);
                const detail::RegularizedSystem<Scalar> sys(kx_tr, ky_tr, alpha);
                for (std::size_t li = 0; li < opt.lambda_candidates.size(); ++li) {
                    const Vec<Scalar> theta = sys.solve(static_cast<Scalar>(opt.lambda_candidates[li]));
                    loss[li] += detail::holdout_loss(kx_te, ky_te, theta, alpha);
                }
            }
            for (std::size_t li = 0; li < loss.size(); ++li) {
                if (loss[li] < best) {
                    best = loss[li];
                    best_sigma = si;
                    best_lambda = li;
                }
            }
        }
    } else {
        // Too few samples to cross-validate: middle candidates.
        best_sigma = sigmas.size() / 2;
        best_lambda = opt.lambda_candidates.size() / 2;
    }

    const Scalar sigma = sigmas[best_sigma];
    const auto lambda = static_cast<Scalar>(opt.lambda_candidates[best_lambda]);
    const Mat<Scalar> kx = detail::gaussian_from_sq(dx, sigma);
    const Mat<Scalar> ky = detail::gaussian_from_sq(dy, sigma);
    const Vec<Scalar> theta = detail::RegularizedSystem<Scalar>(kx, ky, alpha).solve(lambda);

    fit.sigma = static_cast<double>(sigma);
    fit.lambda = static_cast<double>(lambda);
    fit.theta = theta.template cast<double>();
    fit.pe = static_cast<double>(detail::pe_from_design(kx, ky, theta, alpha));
    return fit;
}

/// One-directional alpha-relative Pearson divergence PE(numer || denom), unclamped.
template <typename DN, typename DD>
double relative_pearson_divergence(const Eigen::MatrixBase<DN>& numer, const Eigen::MatrixBase<DD>& denom,
                                   const RatioFitOptions& opt) {
    return fit_relative_density_ratio(numer, denom, opt).pe;
}

/// Symmetrized change score PE(prev || next) + PE(next || prev), clamped at 0.
template <typename DP, typename DN>
PeScore pe_divergence_score(const Eigen::MatrixBase<DP>& prev, const Eigen::MatrixBase<DN>& next,
                            const RatioFitOptions& opt) {
    const RatioFit forward = fit_relative_density_ratio(prev, next, opt);
    const RatioFit backward = fit_relative_density_ratio(next, prev, opt);
    if (forward.degenerate && backward.degenerate) {
        return {0.0, true};
    }
    return {std::max(0.0, forward.pe + backward.pe), false};
}

} // namespace gapsense
