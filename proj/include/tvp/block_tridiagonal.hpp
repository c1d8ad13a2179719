#ifndef TVP_BLOCK_TRIDIAGONAL_HPP
#define TVP_BLOCK_TRIDIAGONAL_HPP

// Symmetric block-tridiagonal matrices with n square blocks of size m, and their
// block Cholesky factorization. This is the structure of the GLS normal matrix
// Z'H^{-1}Z + C^{-1}'Q^{-1}C^{-1}, so every production solve runs in O(n m^3).

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "tvp/spd.hpp"
#include "tvp/types.hpp"

namespace tvp {

template <typename Scalar>
class BlockTridiagonal {
public:
    using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    BlockTridiagonal() = default;
    BlockTridiagonal(Index n, Index m)
        : m_(m), diag_(n, MatrixType::Zero(m, m)), lower_(n > 0 ? n - 1 : 0, MatrixType::Zero(m, m)) {}

    Index blocks() const { return static_cast<Index>(diag_.size()); }
    Index block_size() const { return m_; }
    Index size() const { return blocks() * m_; }

    MatrixType& diag(Index t) { return diag_[t]; }
    const MatrixType& diag(Index t) const { return diag_[t]; }
    /// Block (t+1, t).
    MatrixType& lower(Index t) { return lower_[t]; }
    const MatrixType& lower(Index t) const { return lower_[t]; }

    template <typename Derived>
    MatrixType operator*(const Eigen::MatrixBase<Derived>& x) const {
        MatrixType out(x.rows(), x.cols());
        const Index n = blocks();
        for (Index t = 0; t < n; ++t) {
            auto row = out.middleRows(t * m_, m_);
            row.noalias() = diag_[t] * x.middleRows(t * m_, m_);
            if (t > 0) row.noalias() += lower_[t - 1] * x.middleRows((t - 1) * m_, m_);
            if (t + 1 < n) row.noalias() += lower_[t].transpose() * x.middleRows((t + 1) * m_, m_);
        }
        return out;
    }

    MatrixType to_dense() const {
        const Index n = blocks();
        MatrixType out = MatrixType::Zero(size(), size());
        for (Index t = 0; t < n; ++t) {
            out.block(t * m_, t * m_, m_, m_) = diag_[t];
            if (t + 1 < n) {
                out.block((t + 1) * m_, t * m_, m_, m_) = lower_[t];
                out.block(t * m_, (t + 1) * m_, m_, m_) = lower_[t].transpose();
            }
        }
        return out;
    }

private:
    Index m_ = 0;
    std::vector<MatrixType> diag_;
    std::vector<MatrixType> lower_;
};

/// A = L L' with L block lower bidiagonal: diagonal blocks lower-triangular, subdiagonal dense.
template <typename Scalar>
class BlockTridiagonalCholesky {
public:
    using MatrixType = typename BlockTridiagonal<Scalar>::MatrixType;
    using VectorType = typename BlockTridiagonal<Scalar>::VectorType;

    explicit BlockTridiagonalCholesky(const BlockTridiagonal<Scalar>& A)
        : m_(A.block_size()), diag_(A.blocks()), sub_(A.blocks() > 0 ? A.blocks() - 1 : 0) {
        const Index n = A.blocks();
        MatrixType schur = A.diag(0);
        for (Index t = 0; t < n; ++t) {
            auto llt = checked_llt<Scalar>(schur, t * m_, "block-tridiagonal system");
            diag_[t] = llt.matrixL();
            if (t + 1 < n) {
                // sub_t = A_{t+1,t} L_t^{-T}
                sub_[t] = diag_[t]
                              .template triangularView<Eigen::Lower>()
                              .solve(A.lower(t).transpose())
                              .transpose();
                schur = A.diag(t + 1);
                schur.noalias() -= sub_[t] * sub_[t].transpose();
            }
        }
    }

    /// Wraps an existing factor: `diag` lower-triangular with positive diagonal, `sub[t]` block (t+1, t).
    static BlockTridiagonalCholesky from_factor(std::vector<MatrixType> diag, std::vector<MatrixType> sub) {
        if (diag.empty() || sub.size() + 1 != diag.size())
            throw ValidationError("BlockTridiagonalCholesky: inconsistent factor blocks");
        BlockTridiagonalCholesky out;
        out.m_ = diag.front().rows();
        for (std::size_t t = 0; t < diag.size(); ++t) {
            const auto d = diag[t].diagonal();
            for (Index i = 0; i < out.m_; ++i)
                if (!(d(i) > Scalar(0)) || !std::isfinite(static_cast<double>(d(i))))
                    throw NumericalError("block-bidiagonal factor is singular at pivot " +
                                             std::to_string(static_cast<Index>(t) * out.m_ + i),
                                         static_cast<Index>(t) * out.m_ + i);
        }
        out.diag_ = std::move(diag);
        out.sub_ = std::move(sub);
        return out;
    }

    Index blocks() const { return static_cast<Index>(diag_.size()); }
    const MatrixType& factor_diag(Index t) const { return diag_[t]; }
    const MatrixType& factor_sub(Index t) const { return sub_[t]; }

    template <typename Derived>
    MatrixType solve(const Eigen::MatrixBase<Derived>& B) const {
        const Index n = blocks();
        MatrixType x = B;
        for (Index t = 0; t < n; ++t) {
            auto xt = x.middleRows(t * m_, m_);
            if (t > 0) xt.noalias() -= sub_[t - 1] * x.middleRows((t - 1) * m_, m_);
            diag_[t].template triangularView<Eigen::Lower>().solveInPlace(xt);
        }
        for (Index t = n - 1; t >= 0; --t) {
            auto xt = x.middleRows(t * m_, m_);
            if (t + 1 < n) xt.noalias() -= sub_[t].transpose() * x.middleRows((t + 1) * m_, m_);
            diag_[t].transpose().template triangularView<Eigen::Upper>().solveInPlace(xt);
        }
        return x;
    }

    Scalar log_determinant() const {
        Scalar s(0);
        for (const auto& d : diag_) s += d.diagonal().array().log().sum();
        return Scalar(2) * s;
    }

    /// Diagonal blocks of A^{-1} via the backward selected-inversion recursion
    ///   S_nn = L_n^{-T} L_n^{-1},
    ///   S_{t,t+1} = -L_t^{-T} sub_t' S_{t+1,t+1},
    ///   S_tt = L_t^{-T} (L_t^{-1} - sub_t' S_{t+1,t}).
    std::vector<MatrixType> inverse_diagonal_blocks() const {
        const Index n = blocks();
        std::vector<MatrixType> out(n);
        if (n == 0) return out;
        const MatrixType I = MatrixType::Identity(m_, m_);
        auto l_inv = [&](Index t) {
            return MatrixType(diag_[t].template triangularView<Eigen::Lower>().solve(I));
        };
        auto lt_solve = [&](Index t, MatrixType rhs) {
            diag_[t].transpose().template triangularView<Eigen::Upper>().solveInPlace(rhs);
            return rhs;
        };
        out[n - 1] = lt_solve(n - 1, l_inv(n - 1));
        for (Index t = n - 2; t >= 0; --t) {
            MatrixType upper = -lt_solve(t, sub_[t].transpose() * out[t + 1]);  // S_{t,t+1}
            MatrixType rhs = l_inv(t);
            rhs.noalias() -= sub_[t].transpose() * upper.transpose();
            MatrixType s = lt_solve(t, rhs);
            out[t] = Scalar(0.5) * (s + s.transpose());
        }
        return out;
    }

private:
    BlockTridiagonalCholesky() = default;

    Index m_ = 0;
    std::vector<MatrixType> diag_;
    std::vector<MatrixType> sub_;
};

/// Block-tridiagonal SPD solve A X = B.
template <typename Scalar, typename Derived>
typename BlockTridiagonal<Scalar>::MatrixType solve_spd(const BlockTridiagonal<Scalar>& A,
                                                        const Eigen::MatrixBase<Derived>& B) {
    if (A.size() != B.rows()) throw ValidationError("solve_spd: dimension mismatch");
    return BlockTridiagonalCholesky<Scalar>(A).solve(B);
}

}  // namespace tvp

#endif
