#ifndef BEHAVIOR_EPI_PRCC_HPP
#define BEHAVIOR_EPI_PRCC_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace behavior_epi {

/// Ranks 1..n of @p v; tied values share the average of their ranks.
inline Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& v)
{
    const Eigen::Index n = v.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return v(a) < v(b); });
    Eigen::VectorXd ranks(n);
    for (Eigen::Index i = 0; i < n;) {
        Eigen::Index j = i;
        while (j + 1 < n && v(order[static_cast<std::size_t>(j + 1)]) == v(order[static_cast<std::size_t>(i)])) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Eigen::Index k = i; k <= j; ++k) ranks(order[static_cast<std::size_t>(k)]) = r;
        i = j + 1;
    }
    return ranks;
}

inline double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
    const Eigen::VectorXd xc = x.array() - x.mean();
    const Eigen::VectorXd yc = y.array() - y.mean();
    const double denom = std::sqrt(xc.squaredNorm() * yc.squaredNorm());
    return denom > 0.0 ? std::clamp(xc.dot(yc) / denom, -1.0, 1.0) : 0.0;
}

/**
 * @brief Partial rank correlation coefficient of every column of @p samples with @p response.
 *
 * For column j, the ranks of column j and the ranks of the response are each regressed (least squares with
 * intercept) on the ranks of all other columns; the coefficient is the Pearson correlation of the two
 * residual vectors. A residual with zero variance gives a coefficient of 0.
 * @throws std::invalid_argument for fewer than 20 rows or a rank-deficient regressor matrix.
 */
inline Eigen::VectorXd prcc(const Eigen::MatrixXd& samples, const Eigen::VectorXd& response)
{
    const Eigen::Index n = samples.rows();
    const Eigen::Index k = samples.cols();
    if (response.size() != n) throw std::invalid_argument("prcc: response length differs from the sample count");
    if (n < 20) throw std::invalid_argument("prcc: at least 20 valid samples are required");
    if (n <= k + 1) throw std::invalid_argument("prcc: more samples than parameters are required");
    Eigen::MatrixXd ranks(n, k);
    for (Eigen::Index j = 0; j < k; ++j) ranks.col(j) = average_ranks(samples.col(j));
    const Eigen::VectorXd ry = average_ranks(response);

    Eigen::VectorXd out(k);
    Eigen::MatrixXd z(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        z.col(0).setOnes();
        for (Eigen::Index c = 0, pos = 1; c < k; ++c) {
            if (c != j) z.col(pos++) = ranks.col(c);
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
        if (qr.rank() < k) throw std::invalid_argument("prcc: rank-deficient regressor matrix");
        const Eigen::VectorXd ex = ranks.col(j) - z * qr.solve(ranks.col(j));
        const Eigen::VectorXd ey = ry - z * qr.solve(ry);
        out(j) = pearson(ex, ey);
    }
    return out;
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_PRCC_HPP
