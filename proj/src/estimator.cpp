#include "tvp/estimator.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tvp/block_tridiagonal.hpp"
#include "tvp/spd.hpp"

namespace tvp {

std::string to_string(Method method) {
    switch (method) {
        case Method::OLS: return "OLS";
        case Method::FGLS1: return "1FGLS";
        case Method::FGLS2: return "2FGLS";
        case Method::ExactGLS: return "GLS";
    }
    return "unknown";
}

namespace {

double log_det_spd(const Matrix& A, const char* what) {
    const auto llt = checked_llt<double>(A, 0, what);
    return 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
}

EstimateSet make_set(const StackedSystem& sys) {
    EstimateSet est;
    est.h_used = sys.h_blocks.front();
    est.q_used = sys.q_blocks.front();
    return est;
}

}  // namespace

EstimateSet estimate_gls(const StackedSystem& sys, const GlsOptions& opts) {
    sys.validate();
    const Index m = sys.m();
    const BlockTridiagonalCholesky<double> chol = factor_normal_matrix(sys);
    EstimateSet est = make_set(sys);
    est.method = Method::ExactGLS;
    est.path = CoefficientPath::from_stacked(chol.solve(normal_rhs(sys)).col(0), m);
    if (opts.compute_mse) est.mse_blocks = chol.inverse_diagonal_blocks();
    est.loglik = log_likelihood(sys);
    est.covariances = CovEstimates{est.h_used, est.q_used, false};
    return est;
}

EstimateSet estimate_ols(const StackedSystem& sys, const GlsOptions& opts) {
    EstimateSet est = estimate_gls(
        with_weights(sys, Matrix::Identity(sys.k(), sys.k()), Matrix::Identity(sys.m(), sys.m())),
        opts);
    est.method = Method::OLS;
    return est;
}

EstimateSet estimate_with_intercepts(const StackedSystem& sys, const GlsOptions& opts) {
    sys.validate();
    const Index n = sys.n(), k = sys.k(), m = sys.m();
    const BlockTridiagonalCholesky<double> chol = factor_normal_matrix(sys);

    // E = Z'H^{-1} iota (nm x k), A = iota'H^{-1}iota, a = iota'H^{-1}Y.
    Matrix E(n * m, k);
    Matrix A = Matrix::Zero(k, k);
    Vector a = Vector::Zero(k);
    const Matrix Ik = Matrix::Identity(k, k);
    for (Index t = 0; t < n; ++t) {
        const auto h_llt = checked_llt<double>(sys.h_blocks[t], 0, "H_t");
        const Matrix Hinv = h_llt.solve(Ik);
        E.middleRows(t * m, m).noalias() = sys.z_blocks[t].transpose() * Hinv;
        A += Hinv;
        a.noalias() += Hinv * sys.y_blocks[t];
    }
    const Matrix GinvE = chol.solve(E);
    const Vector Ginv_r = chol.solve(normal_rhs(sys)).col(0);

    // F = A - E'G^{-1}E = iota'Omega^{-1}iota
    Matrix F = A - E.transpose() * GinvE;
    F = 0.5 * (F + F.transpose());
    Eigen::LLT<Matrix> f_llt(F);
    if (f_llt.info() != Eigen::Success || first_failing_pivot(F) >= 0)
        throw NumericalError("estimate_with_intercepts: iota' Omega^{-1} iota is singular");
    const Matrix Finv = f_llt.solve(Ik);

    const Vector v_hat = Finv * (a - E.transpose() * Ginv_r);
    const Vector beta = Ginv_r - GinvE * v_hat;

    EstimateSet est = make_set(sys);
    est.method = Method::ExactGLS;
    est.path = CoefficientPath::from_stacked(beta, m);
    est.path.v = v_hat;
    est.v_hat = v_hat;
    est.v_cov = Finv;
    if (opts.compute_mse) {
        est.mse_blocks = chol.inverse_diagonal_blocks();
        est.var_blocks.reserve(n);
        for (Index t = 0; t < n; ++t) {
            const auto Et = GinvE.middleRows(t * m, m);
            est.var_blocks.push_back(est.mse_blocks[t] + Et * Finv * Et.transpose());
        }
    }
    est.loglik = log_likelihood(sys, v_hat);
    est.covariances = CovEstimates{est.h_used, est.q_used, false};
    return est;
}

double log_likelihood(const StackedSystem& sys, const std::optional<Vector>& v) {
    sys.validate();
    const Index n = sys.n(), k = sys.k(), m = sys.m();
    if (v && v->size() != k) throw ValidationError("log_likelihood: v must have length k");
    const BlockTridiagonalCholesky<double> chol = factor_normal_matrix(sys);

    double logdet = chol.log_determinant();
    double quad = 0.0;
    Vector w(n * m);
    for (Index t = 0; t < n; ++t) {
        Vector r = sys.y_blocks[t] - sys.z_blocks[t] * sys.b0;
        if (v) r -= *v;
        const auto h_llt = checked_llt<double>(sys.h_blocks[t], 0, "H_t");
        const Vector Hinv_r = h_llt.solve(r);
        quad += r.dot(Hinv_r);
        w.segment(t * m, m).noalias() = sys.z_blocks[t].transpose() * Hinv_r;
        logdet += 2.0 * Matrix(h_llt.matrixL()).diagonal().array().log().sum();
        logdet += log_det_spd(sys.q_blocks[t], "Q_t");
    }
    quad -= w.dot(chol.solve(w).col(0));
    return -0.5 * static_cast<double>(n * k) * std::log(2.0 * std::numbers::pi) - 0.5 * logdet -
           0.5 * quad;
}

double log_likelihood_dense(const StackedSystem& sys, const std::optional<Vector>& v, Index cap) {
    const DenseForm d = dense_form(sys, cap);
    const Matrix omega = compute_omega(d);
    Vector r = d.Y - d.Z * d.C_b0_star;
    if (v) {
        if (v->size() != sys.k()) throw ValidationError("log_likelihood: v must have length k");
        r -= d.iota * *v;
    }
    const auto llt = checked_llt<double>(omega, 0, "Omega");
    const double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
    return -0.5 * static_cast<double>(r.size()) * std::log(2.0 * std::numbers::pi) - 0.5 * logdet -
           0.5 * r.dot(llt.solve(r));
}

Matrix smoothed_variance(const StackedSystem& sys, VarianceMode mode, Index cap,
                         bool zero_v_variance) {
    const DenseForm d = dense_form(sys, cap);
    const auto omega_llt = checked_llt<double>(compute_omega(d), 0, "Omega");
    const Matrix OinvZCQC = omega_llt.solve(Matrix(d.Z * d.CQCt));  // Omega^{-1} Z C Q C'
    Matrix out = d.CQCt - d.CQCt * d.Z.transpose() * OinvZCQC;
    if (mode == VarianceMode::gls && !zero_v_variance) {
        const Matrix Oinv_iota = omega_llt.solve(d.iota);
        const Matrix F = d.iota.transpose() * Oinv_iota;
        const Matrix cross = OinvZCQC.transpose() * d.iota;  // CQC'Z'Omega^{-1} iota
        out += cross * checked_llt<double>(F, 0, "iota' Omega^{-1} iota").solve(Matrix(cross.transpose()));
    }
    return 0.5 * (out + out.transpose());
}

CovEstimates raw_residual_covariances(const EstimateSet& est, const StackedSystem& sys) {
    const Index n = sys.n(), k = sys.k(), m = sys.m();
    if (est.path.n() != n || est.path.m() != m)
        throw ValidationError("residual_covariances: path shape does not match the system");
    CovEstimates out{Matrix::Zero(k, k), Matrix::Zero(m, m), false};
    for (Index t = 0; t < n; ++t) {
        Vector eps = sys.y_blocks[t] - sys.z_blocks[t] * est.path.beta[t];
        if (est.v_hat) eps -= *est.v_hat;
        const Vector eta = est.path.beta[t] - (t == 0 ? sys.b0 : est.path.beta[t - 1]);
        out.h_hat.noalias() += eps * eps.transpose();
        out.q_hat.noalias() += eta * eta.transpose();
    }
    out.h_hat /= static_cast<double>(n);
    out.q_hat /= static_cast<double>(n);
    return out;
}

CovEstimates residual_covariances(const EstimateSet& est, const StackedSystem& sys) {
    const CovEstimates raw = raw_residual_covariances(est, sys);
    const Regularized h = regularize_spd(raw.h_hat, "estimated H");
    const Regularized q = regularize_spd(raw.q_hat, "estimated Q");
    return CovEstimates{h.value, q.value, h.jittered || q.jittered};
}

Vector fit_constant_var(const ObservationSet& y, const ModelSpec& spec) {
    spec.validate();
    y.validate(spec.k, spec.T);
    const Index k = spec.k, p = spec.p, n = spec.n();
    const bool with_const = spec.intercept_mode != InterceptMode::none;
    const Index width = k * p + (with_const ? 1 : 0);
    Matrix X(n, width), Yr(n, k);
    for (Index r = 0; r < n; ++r) {
        const Index t = r + p;
        Index c = 0;
        if (with_const) X(r, c++) = 1.0;
        for (Index lag = 1; lag <= p; ++lag, c += k) X.row(r).segment(c, k) = y.y[t - lag].transpose();
        Yr.row(r) = y.y[t].transpose();
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < width)
        throw ValidationError("fit_constant_var: collinear regressors (rank " +
                              std::to_string(qr.rank()) + " < " + std::to_string(width) + ")");
    const Matrix Bt = qr.solve(Yr);  // width x k, so B = Bt'
    const Index skip = spec.intercept_mode == InterceptMode::time_invariant ? 1 : 0;
    const Index cols = width - skip;
    Vector b0(k * cols);
    for (Index j = 0; j < cols; ++j) b0.segment(j * k, k) = Bt.row(j + skip).transpose();
    return b0;
}

std::vector<EstimateSet> fgls_pipeline(const ObservationSet& y, const ModelSpec& spec, int steps,
                                       const std::optional<Vector>& b0, const GlsOptions& opts) {
    if (steps < 0 || steps > 2)
        throw ValidationError("fgls_pipeline: steps must be 0, 1 or 2, got " + std::to_string(steps));
    const Vector start = b0 ? *b0 : fit_constant_var(y, spec);
    const bool intercepts = spec.intercept_mode == InterceptMode::time_invariant;
    StackedSystem sys = make_system(y, spec, start, Matrix::Identity(spec.k, spec.k),
                                    Matrix::Identity(spec.m(), spec.m()));

    const Method methods[] = {Method::OLS, Method::FGLS1, Method::FGLS2};
    std::vector<EstimateSet> out;
    for (int step = 0; step <= steps; ++step) {
        try {
            if (step > 0) {
                const CovEstimates& prev = *out.back().covariances;
                sys = with_weights(std::move(sys), prev.h_hat, prev.q_hat);
            }
            EstimateSet est = intercepts ? estimate_with_intercepts(sys, opts) : estimate_gls(sys, opts);
            est.method = methods[step];
            est.jittered = step > 0 && out.back().covariances->jittered;
            est.covariances = residual_covariances(est, sys);
            const StackedSystem produced =
                with_weights(sys, est.covariances->h_hat, est.covariances->q_hat);
            est.loglik = log_likelihood(produced, est.v_hat);
            out.push_back(std::move(est));
        } catch (const NumericalError& e) {
            throw NumericalError("fgls_pipeline step " + std::to_string(step) + " (" +
                                     to_string(methods[step]) + "): " + e.what(),
                                 e.where());
        }
    }
    return out;
}

}  // namespace tvp
