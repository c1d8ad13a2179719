#ifndef TVP_TEST_HELPERS_HPP
#define TVP_TEST_HELPERS_HPP

#include <random>
#include <vector>

#include "tvp/types.hpp"

namespace tvp::test {

// Scalar-observation system with Z_t = z_t (1 x 1), constant h and q.
inline StackedSystem scalar_system(const std::vector<double>& y, const std::vector<double>& z, double h, double q,
                                   double b0) {
    StackedSystem s;
    for (std::size_t t = 0; t < y.size(); ++t) {
        s.z_blocks.push_back(Matrix::Constant(1, 1, z[t]));
        s.y_blocks.push_back(Vector::Constant(1, y[t]));
        s.h_blocks.push_back(Matrix::Constant(1, 1, h));
        s.q_blocks.push_back(Matrix::Constant(1, 1, q));
    }
    s.b0 = Vector::Constant(1, b0);
    return s;
}

inline Matrix random_matrix(Index r, Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Matrix A(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) A(i, j) = normal(rng);
    return A;
}

inline double sum_sq_diff(const std::vector<Vector>& path) {
    double s = 0.0;
    for (std::size_t t = 1; t < path.size(); ++t) s += (path[t] - path[t - 1]).squaredNorm();
    return s;
}

}  // namespace tvp::test

#endif
