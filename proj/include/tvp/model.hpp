#ifndef TVP_MODEL_HPP
#define TVP_MODEL_HPP

#include <vector>

#include "tvp/block_tridiagonal.hpp"
#include "tvp/types.hpp"

namespace tvp {

/// Default cap on n*k (and n*m) for the dense Omega-based routes.
inline constexpr Index kDefaultDenseCap = 2000;

/// Z_t = [1, y'_{t-1}, ..., y'_{t-p}] (x) I_k for t = p+1..T; the leading 1 is dropped
/// unless the intercept is time-varying.
std::vector<Matrix> build_regressors(const ObservationSet& y, const ModelSpec& spec);

/// Full stacked system with time-invariant weights H_t = H, Q_t = Q.
StackedSystem make_system(const ObservationSet& y, const ModelSpec& spec, const Vector& b0,
                          const Matrix& H, const Matrix& Q);

/// Copy of `sys` with every H_t = H and Q_t = Q.
StackedSystem with_weights(StackedSystem sys, const Matrix& H, const Matrix& Q);

/// Z'H^{-1}Z + C^{-1}'Q^{-1}C^{-1} assembled blockwise.
BlockTridiagonal<double> normal_matrix(const StackedSystem& sys);

/// Cholesky factor of the normal matrix built without forming it: a running Householder QR
/// over the whitened rows [H_t^{-1/2} Z_t] and [Q_t^{-1/2}(beta_t - beta_{t-1})]. This keeps
/// the factor accurate when Z'H^{-1}Z alone would swamp the random-walk term.
BlockTridiagonalCholesky<double> factor_normal_matrix(const StackedSystem& sys);

/// Z'H^{-1}Y + C^{-1}'Q^{-1}b0*, with Y replaced by `y_adjusted` when given (length n*k).
Vector normal_rhs(const StackedSystem& sys, const Vector* y_adjusted = nullptr);

/// Dense matrices of the stacked formulation, for validation-size problems only.
struct DenseForm {
    Matrix Z;      // nk x nm, block diagonal
    Matrix H;      // nk x nk
    Matrix Q;      // nm x nm
    Matrix CQCt;   // C Q C'
    Matrix iota;   // nk x k, stacked identities
    Vector Y;      // nk
    Vector b0_star;
    Vector C_b0_star;
};

/// Throws CapExceededError when n*k or n*m exceeds `cap`.
void check_dense_cap(const StackedSystem& sys, Index cap);

DenseForm dense_form(const StackedSystem& sys, Index cap = kDefaultDenseCap);

/// Omega = H + Z C Q C' Z' (validation only).
Matrix compute_omega(const StackedSystem& sys, Index cap = kDefaultDenseCap);
Matrix compute_omega(const DenseForm& d);

}  // namespace tvp

#endif
