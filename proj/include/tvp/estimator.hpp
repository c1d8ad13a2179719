#ifndef TVP_ESTIMATOR_HPP
#define TVP_ESTIMATOR_HPP

#include <optional>
#include <string>
#include <vector>

#include "tvp/model.hpp"
#include "tvp/types.hpp"

namespace tvp {

enum class Method { OLS, FGLS1, FGLS2, ExactGLS };

std::string to_string(Method method);

/// Time-invariant covariance estimates from a fitted path.
struct CovEstimates {
    Matrix h_hat;  // k x k
    Matrix q_hat;  // m x m
    bool jittered = false;
};

/// One fitted coefficient path.
///
/// `mse_blocks` are the diagonal blocks of Var(beta | Y_T), i.e. of
/// (Z'H^{-1}Z + C^{-1}'Q^{-1}C^{-1})^{-1}. With time-invariant intercepts,
/// `var_blocks` additionally holds Var(beta^) including the uncertainty from v^.
///
/// `h_used`/`q_used` are the weights the solve ran with. `covariances` are the
/// estimates produced from this path's residuals, and `loglik` is evaluated at
/// those produced estimates when the set comes out of fgls_pipeline; for a
/// direct estimate_gls call it is evaluated at the weights used.
struct EstimateSet {
    Method method = Method::ExactGLS;
    CoefficientPath path;
    std::optional<Vector> v_hat;
    std::optional<Matrix> v_cov;  // (iota' Omega^{-1} iota)^{-1}
    std::vector<Matrix> mse_blocks;
    std::vector<Matrix> var_blocks;
    double loglik = 0.0;
    Matrix h_used;
    Matrix q_used;
    std::optional<CovEstimates> covariances;
    bool jittered = false;
};

struct GlsOptions {
    bool compute_mse = true;
};

/// GLS on the stacked regression [Y_T; -b0*] = [Z; -C^{-1}] beta + [eps; eta], solved
/// through the block-tridiagonal normal equations. Weights are the system's H_t, Q_t.
EstimateSet estimate_gls(const StackedSystem& sys, const GlsOptions& opts = {});

/// estimate_gls with H_t = I_k and Q_t = I_m.
EstimateSet estimate_ols(const StackedSystem& sys, const GlsOptions& opts = {});

/// Joint GLS for [v; beta] when the model carries time-invariant intercepts v.
EstimateSet estimate_with_intercepts(const StackedSystem& sys, const GlsOptions& opts = {});

/// Log-likelihood of Y_T given H, Q, b0* (and v, if given), through the block factorization:
///   log|Omega| = sum log|H_t| + sum log|Q_t| + log|Z'H^{-1}Z + C^{-1}'Q^{-1}C^{-1}|.
double log_likelihood(const StackedSystem& sys, const std::optional<Vector>& v = std::nullopt);

/// Same quantity from the dense Omega = H + ZCQC'Z'. Validation only.
double log_likelihood_dense(const StackedSystem& sys, const std::optional<Vector>& v = std::nullopt,
                            Index cap = kDefaultDenseCap);

enum class VarianceMode { kalman, gls };

/// kalman: CQC' - CQC'Z'Omega^{-1}ZCQC'.
/// gls:    the above + CQC'Z'Omega^{-1} iota (iota'Omega^{-1}iota)^{-1} iota'Omega^{-1}ZCQC'.
/// With `zero_v_variance` the (iota'Omega^{-1}iota)^{-1} factor is replaced by 0.
Matrix smoothed_variance(const StackedSystem& sys, VarianceMode mode, Index cap = kDefaultDenseCap,
                         bool zero_v_variance = false);

/// Residual second moments without any regularization:
///   H^ = (1/n) sum eps^_t eps^_t',  Q^ = (1/n) sum eta^_t eta^_t',
/// with eps^_t = y_t - v^ - Z_t beta^_t and eta^_t = beta^_t - beta^_{t-1}, beta^_p = b0.
CovEstimates raw_residual_covariances(const EstimateSet& est, const StackedSystem& sys);

/// raw_residual_covariances followed by the jitter policy of regularize_spd.
CovEstimates residual_covariances(const EstimateSet& est, const StackedSystem& sys);

/// Coefficients of a full-sample constant-coefficient VAR(p) fit by least squares, laid out
/// like beta_t (vec of the k x (kp [+1]) coefficient matrix). For time-invariant intercepts
/// the intercept column is fitted but not returned. Collinear regressors are a ValidationError.
Vector fit_constant_var(const ObservationSet& y, const ModelSpec& spec);

/// OLS, then FGLS with the OLS covariance estimates, then FGLS again with the 1FGLS ones.
/// `steps` = 0, 1 or 2 selects how many FGLS passes follow OLS.
std::vector<EstimateSet> fgls_pipeline(const ObservationSet& y, const ModelSpec& spec, int steps,
                                       const std::optional<Vector>& b0 = std::nullopt,
                                       const GlsOptions& opts = {});

}  // namespace tvp

#endif
