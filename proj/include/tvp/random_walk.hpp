#ifndef TVP_RANDOM_WALK_HPP
#define TVP_RANDOM_WALK_HPP

// The random walk generating operator C (block lower-triangular ones) and its
// inverse, the block first difference. Both act on stacked vectors of n blocks
// of size m, or on every column of a matrix with n*m rows.

#include <string>

#include <Eigen/Dense>

#include "tvp/types.hpp"

namespace tvp {

namespace detail {
inline void check_block_length(Index rows, Index m) {
    if (m <= 0 || rows % m != 0)
        throw ValidationError("random walk operator: length " + std::to_string(rows) +
                              " is not a multiple of block size " + std::to_string(m));
}
}  // namespace detail

/// Block cumulative sum: out_t = x_1 + ... + x_t.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime>
apply_C(const Eigen::MatrixBase<Derived>& x, Index m) {
    detail::check_block_length(x.rows(), m);
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> out = x;
    const Index n = x.rows() / m;
    for (Index t = 1; t < n; ++t)
        out.middleRows(t * m, m) += out.middleRows((t - 1) * m, m);
    return out;
}

/// Block first difference: out_1 = x_1, out_t = x_t - x_{t-1}.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime>
apply_C_inverse(const Eigen::MatrixBase<Derived>& x, Index m) {
    detail::check_block_length(x.rows(), m);
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> out = x;
    const Index n = x.rows() / m;
    for (Index t = n - 1; t >= 1; --t)
        out.middleRows(t * m, m) -= x.middleRows((t - 1) * m, m);
    return out;
}

/// C' x: reverse block cumulative sum, out_t = x_t + ... + x_n.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime>
apply_C_transpose(const Eigen::MatrixBase<Derived>& x, Index m) {
    detail::check_block_length(x.rows(), m);
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> out = x;
    const Index n = x.rows() / m;
    for (Index t = n - 2; t >= 0; --t)
        out.middleRows(t * m, m) += out.middleRows((t + 1) * m, m);
    return out;
}

/// (C^{-1})' x: out_t = x_t - x_{t+1}, out_n = x_n.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime>
apply_C_inverse_transpose(const Eigen::MatrixBase<Derived>& x, Index m) {
    detail::check_block_length(x.rows(), m);
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> out = x;
    const Index n = x.rows() / m;
    for (Index t = 0; t + 1 < n; ++t)
        out.middleRows(t * m, m) -= x.middleRows((t + 1) * m, m);
    return out;
}

}  // namespace tvp

#endif
