#ifndef TVP_SMOOTHER_HPP
#define TVP_SMOOTHER_HPP

#include <optional>
#include <vector>

#include "tvp/model.hpp"
#include "tvp/types.hpp"

namespace tvp {

/// Smoothed coefficient path E[beta | Y_T] with its MSE.
struct SmoothedResult {
    CoefficientPath beta_tilde;
    std::vector<Matrix> mse_blocks;     // n diagonal m x m blocks of Var(beta | Y_T)
    std::optional<Matrix> mse_full;     // only from the dense route
    double loglik = 0.0;
};

struct ConditionalMoments {
    Matrix mean;
    Matrix var;
};

/// Gaussian conditioning:
///   E[b|y]   = E[b] + Cov(b,y) Var(y)^{-1} (y - E[y])
///   Var[b|y] = Var(b) - Cov(b,y) Var(y)^{-1} Cov(b,y)'
ConditionalMoments regression_lemma(const Matrix& mean_b, const Matrix& cov_b, const Matrix& cov_by,
                                    const Matrix& cov_y, const Matrix& y_dev);

/// beta~ = C b0* + C Q C' Z' Omega^{-1} (Y_T - Z C b0*) with the dense Omega. Validation-size only.
SmoothedResult smooth_direct(const StackedSystem& sys, Index cap = kDefaultDenseCap);

/// Forward Kalman filter (identity transition, Joseph-form update, P0 = 0) followed by
/// the fixed-interval backward smoother. Scales linearly in n.
SmoothedResult smooth_recursive(const StackedSystem& sys);

/// Filtered means a_{t|t}, as produced by the forward pass of smooth_recursive.
std::vector<Vector> filter_recursive(const StackedSystem& sys);

}  // namespace tvp

#endif
