#include "tvp/smoother.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tvp/spd.hpp"

namespace tvp {

ConditionalMoments regression_lemma(const Matrix& mean_b, const Matrix& cov_b, const Matrix& cov_by,
                                    const Matrix& cov_y, const Matrix& y_dev) {
    if (cov_by.rows() != cov_b.rows() || cov_by.cols() != cov_y.rows() ||
        y_dev.rows() != cov_y.rows() || mean_b.rows() != cov_b.rows())
        throw ValidationError("regression_lemma: dimension mismatch");
    const auto llt = checked_llt<double>(cov_y, 0, "Var(Y)");
    ConditionalMoments out;
    out.mean = mean_b + cov_by * llt.solve(y_dev);
    out.var = cov_b - cov_by * llt.solve(Matrix(cov_by.transpose()));
    out.var = 0.5 * (out.var + out.var.transpose());
    return out;
}

SmoothedResult smooth_direct(const StackedSystem& sys, Index cap) {
    const DenseForm d = dense_form(sys, cap);
    const Matrix omega = compute_omega(d);
    const Index n = sys.n(), m = sys.m();

    const Matrix cov_by = d.CQCt * d.Z.transpose();
    const Vector y_dev = d.Y - d.Z * d.C_b0_star;
    ConditionalMoments cm = regression_lemma(d.C_b0_star, d.CQCt, cov_by, omega, y_dev);

    SmoothedResult out;
    out.beta_tilde = CoefficientPath::from_stacked(cm.mean.col(0), m);
    out.mse_blocks.reserve(n);
    for (Index t = 0; t < n; ++t) out.mse_blocks.push_back(cm.var.block(t * m, t * m, m, m));
    out.mse_full = std::move(cm.var);

    const auto llt = checked_llt<double>(omega, 0, "Omega");
    const double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    const double quad = y_dev.dot(llt.solve(y_dev));
    out.loglik = -0.5 * static_cast<double>(d.Y.size()) * std::log(2.0 * std::numbers::pi) -
                 0.5 * logdet - 0.5 * quad;
    return out;
}

namespace {

struct FilterPass {
    std::vector<Vector> a_filt;
    std::vector<Matrix> P_filt;
    std::vector<Matrix> P_pred;
    double loglik = 0.0;
};

FilterPass run_filter(const StackedSystem& sys) {
    sys.validate();
    const Index n = sys.n(), m = sys.m(), k = sys.k();
    FilterPass f;
    f.a_filt.reserve(n);
    f.P_filt.reserve(n);
    f.P_pred.reserve(n);
    const Matrix Im = Matrix::Identity(m, m);
    Vector a = sys.b0;
    Matrix P = Matrix::Zero(m, m);
    const double log2pi = std::log(2.0 * std::numbers::pi);
    for (Index t = 0; t < n; ++t) {
        P += sys.q_blocks[t];
        f.P_pred.push_back(P);
        const Matrix& Zt = sys.z_blocks[t];
        const Matrix PZt = P * Zt.transpose();
        Matrix F = Zt * PZt + sys.h_blocks[t];
        F = 0.5 * (F + F.transpose());
        Eigen::LLT<Matrix> llt(F);
        if (llt.info() != Eigen::Success)
            throw NumericalError("Kalman filter: innovation covariance not positive definite at t=" +
                                     std::to_string(t),
                                 t);
        const Vector innov = sys.y_blocks[t] - Zt * a;
        const Matrix K = llt.solve(PZt.transpose()).transpose();
        a += K * innov;
        const Matrix IKZ = Im - K * Zt;
        P = IKZ * P * IKZ.transpose() + K * sys.h_blocks[t] * K.transpose();
        P = 0.5 * (P + P.transpose());
        if (!P.allFinite())
            throw NumericalError("Kalman filter: covariance lost finiteness at t=" + std::to_string(t), t);
        f.a_filt.push_back(a);
        f.P_filt.push_back(P);
        const double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
        f.loglik += -0.5 * (static_cast<double>(k) * log2pi + logdet + innov.dot(llt.solve(innov)));
    }
    return f;
}

}  // namespace

std::vector<Vector> filter_recursive(const StackedSystem& sys) { return run_filter(sys).a_filt; }

SmoothedResult smooth_recursive(const StackedSystem& sys) {
    FilterPass f = run_filter(sys);
    const Index n = sys.n();
    SmoothedResult out;
    out.loglik = f.loglik;
    out.beta_tilde.beta = f.a_filt;
    out.mse_blocks = f.P_filt;
    for (Index t = n - 2; t >= 0; --t) {
        Eigen::LLT<Matrix> llt(f.P_pred[t + 1]);
        if (llt.info() != Eigen::Success)
            throw NumericalError("Kalman smoother: predicted covariance not positive definite at t=" +
                                     std::to_string(t + 1),
                                 t + 1);
        // J_t = P_{t|t} P_{t+1|t}^{-1}
        const Matrix J = llt.solve(f.P_filt[t]).transpose();
        out.beta_tilde.beta[t] = f.a_filt[t] + J * (out.beta_tilde.beta[t + 1] - f.a_filt[t]);
        Matrix P = f.P_filt[t] + J * (out.mse_blocks[t + 1] - f.P_pred[t + 1]) * J.transpose();
        out.mse_blocks[t] = 0.5 * (P + P.transpose());
    }
    return out;
}

}  // namespace tvp
