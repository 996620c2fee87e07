#ifndef BEHAVIOR_EPI_METZLER_HPP
#define BEHAVIOR_EPI_METZLER_HPP

#include <Eigen/Dense>

#include <stdexcept>

namespace behavior_epi {

/// True if every off-diagonal entry of @p m is non-negative.
inline bool is_metzler(const Eigen::Ref<const Eigen::MatrixXd>& m)
{
    if (m.rows() != m.cols()) return false;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (i != j && m(i, j) < 0.0) return false;
        }
    }
    return true;
}

/**
 * @brief Hurwitz stability of a Metzler matrix by recursive Schur complements with 1x1 leading pivots.
 *
 * M = [[a, b], [c, D]] is stable iff a < 0 and D - c b / a is stable; the complement of a Metzler matrix
 * with a negative pivot is again Metzler. A pivot that is >= 0 (including exactly 0) means not stable.
 * @throws std::invalid_argument if @p m is not square or not Metzler.
 */
inline bool metzler_stable(const Eigen::Ref<const Eigen::MatrixXd>& m)
{
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw std::invalid_argument("metzler_stable: matrix must be square and non-empty");
    }
    if (!is_metzler(m)) {
        throw std::invalid_argument("metzler_stable: matrix has negative off-diagonal entries");
    }
    Eigen::MatrixXd work = m;
    for (Eigen::Index size = work.rows(); size > 0; --size) {
        const double pivot = work(0, 0);
        if (!(pivot < 0.0)) {
            return false;
        }
        if (size == 1) {
            return true;
        }
        const Eigen::MatrixXd next = work.bottomRightCorner(size - 1, size - 1) -
                                     work.bottomLeftCorner(size - 1, 1) * work.topRightCorner(1, size - 1) / pivot;
        work = next;
        // round-off can leave tiny negative off-diagonals; the exact complement is Metzler
        for (Eigen::Index i = 0; i < work.rows(); ++i) {
            for (Eigen::Index j = 0; j < work.cols(); ++j) {
                if (i != j && work(i, j) < 0.0) work(i, j) = 0.0;
            }
        }
    }
    return true;
}

/// Largest real part of the spectrum of @p m (dense eigensolver).
inline double max_real_eigenvalue(const Eigen::Ref<const Eigen::MatrixXd>& m)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("max_real_eigenvalue: eigensolver did not converge");
    }
    return es.eigenvalues().real().maxCoeff();
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_METZLER_HPP
