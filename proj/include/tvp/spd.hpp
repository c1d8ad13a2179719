#ifndef TVP_SPD_HPP
#define TVP_SPD_HPP

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "tvp/types.hpp"

namespace tvp {

/// Index of the first non-positive pivot met by an unblocked Cholesky of A,
/// or -1 if A is numerically positive definite.
template <typename Derived>
Index first_failing_pivot(const Eigen::MatrixBase<Derived>& A) {
    using Scalar = typename Derived::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> L = A;
    const Index n = L.rows();
    for (Index j = 0; j < n; ++j) {
        Scalar d = L(j, j);
        for (Index q = 0; q < j; ++q) d -= L(j, q) * L(j, q);
        if (!(d > Scalar(0)) || !std::isfinite(static_cast<double>(d))) return j;
        d = std::sqrt(d);
        L(j, j) = d;
        for (Index i = j + 1; i < n; ++i) {
            Scalar s = L(i, j);
            for (Index q = 0; q < j; ++q) s -= L(i, q) * L(j, q);
            L(i, j) = s / d;
        }
    }
    return -1;
}

/// True when both Eigen's LLT and the unblocked pivot scan accept A.
template <typename Scalar>
bool cholesky_succeeds(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A) {
    if (!A.allFinite()) return false;
    Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> llt(A);
    return llt.info() == Eigen::Success && llt.matrixLLT().allFinite() && first_failing_pivot(A) < 0;
}

/// LLT of an SPD matrix; throws NumericalError carrying the failing pivot (offset by `base`).
template <typename Scalar>
Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>
checked_llt(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A, Index base = 0,
            const char* what = "matrix") {
    Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> llt(A);
    if (llt.info() != Eigen::Success || !llt.matrixLLT().allFinite()) {
        Index pivot = first_failing_pivot(A);
        if (pivot < 0) pivot = 0;
        throw NumericalError(std::string("Cholesky failed: ") + what +
                                 " is not positive definite at pivot " +
                                 std::to_string(base + pivot),
                             base + pivot);
    }
    return llt;
}

/// Dense SPD solve A X = B.
inline Matrix solve_spd(const Matrix& A, const Matrix& B) {
    if (A.rows() != A.cols() || A.rows() != B.rows())
        throw ValidationError("solve_spd: dimension mismatch");
    return checked_llt<double>(A).solve(B);
}

/// Outcome of making an estimated covariance usable as a GLS weight.
struct Regularized {
    Matrix value;
    bool jittered = false;
};

/// Symmetrizes A and checks it is SPD. If not, adds 1e-10 * trace(A)/dim * I once and
/// retries; a second failure is a NumericalError.
Regularized regularize_spd(const Matrix& A, const char* what = "covariance");

/// Max-abs relative difference ||A - B||_max / max(||B||_max, floor).
template <typename DA, typename DB>
double max_rel_diff(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B,
                    double floor = 1e-300) {
    const double scale = std::max(B.cwiseAbs().maxCoeff(), floor);
    return (A - B).cwiseAbs().maxCoeff() / scale;
}

}  // namespace tvp

#endif
