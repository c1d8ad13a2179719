#include "tvp/model.hpp"

#include <string>

#include "tvp/random_walk.hpp"
#include "tvp/spd.hpp"

namespace tvp {

std::vector<Matrix> build_regressors(const ObservationSet& y, const ModelSpec& spec) {
    spec.validate();
    y.validate(spec.k, spec.T);
    const Index k = spec.k, p = spec.p, m = spec.m();
    const bool lead_one = spec.intercept_mode == InterceptMode::time_varying;
    const Index width = m / k;  // length of the row [1, y'_{t-1}, ..., y'_{t-p}]

    std::vector<Matrix> blocks;
    blocks.reserve(spec.n());
    Vector row(width);
    for (Index t = p; t < spec.T; ++t) {
        Index c = 0;
        if (lead_one) row(c++) = 1.0;
        for (Index lag = 1; lag <= p; ++lag) {
            row.segment(c, k) = y.y[t - lag];
            c += k;
        }
        Matrix Zt = Matrix::Zero(k, m);
        for (Index j = 0; j < width; ++j) Zt.block(0, j * k, k, k).diagonal().setConstant(row(j));
        blocks.push_back(std::move(Zt));
    }
    return blocks;
}

StackedSystem make_system(const ObservationSet& y, const ModelSpec& spec, const Vector& b0,
                          const Matrix& H, const Matrix& Q) {
    StackedSystem sys;
    sys.z_blocks = build_regressors(y, spec);
    sys.y_blocks.assign(y.y.begin() + spec.p, y.y.end());
    if (b0.size() != spec.m())
        throw ValidationError("b0: expected length " + std::to_string(spec.m()) + ", got " +
                              std::to_string(b0.size()));
    sys.b0 = b0;
    return with_weights(std::move(sys), H, Q);
}

StackedSystem with_weights(StackedSystem sys, const Matrix& H, const Matrix& Q) {
    const Index n = sys.n();
    if (H.rows() != sys.k() || H.cols() != sys.k())
        throw ValidationError("H: expected " + std::to_string(sys.k()) + "x" +
                              std::to_string(sys.k()));
    if (Q.rows() != sys.m() || Q.cols() != sys.m())
        throw ValidationError("Q: expected " + std::to_string(sys.m()) + "x" +
                              std::to_string(sys.m()));
    sys.h_blocks.assign(n, H);
    sys.q_blocks.assign(n, Q);
    return sys;
}

BlockTridiagonal<double> normal_matrix(const StackedSystem& sys) {
    const Index n = sys.n(), m = sys.m();
    BlockTridiagonal<double> G(n, m);
    const Matrix Im = Matrix::Identity(m, m);
    for (Index t = 0; t < n; ++t) {
        auto h_llt = checked_llt<double>(sys.h_blocks[t], 0, "H_t");
        const Matrix HinvZ = h_llt.solve(sys.z_blocks[t]);
        G.diag(t).noalias() = sys.z_blocks[t].transpose() * HinvZ;
        const Matrix Qinv = checked_llt<double>(sys.q_blocks[t], 0, "Q_t").solve(Im);
        // (C^{-1})' Q^{-1} C^{-1}: Q_t^{-1} enters blocks (t,t), (t-1,t-1) and (t,t-1).
        G.diag(t) += Qinv;
        if (t > 0) {
            G.diag(t - 1) += Qinv;
            G.lower(t - 1) -= Qinv;
        }
    }
    for (Index t = 0; t < n; ++t) G.diag(t) = 0.5 * (G.diag(t) + G.diag(t).transpose());
    return G;
}

BlockTridiagonalCholesky<double> factor_normal_matrix(const StackedSystem& sys) {
    const Index n = sys.n(), m = sys.m(), k = sys.k();
    auto whiten = [](const Matrix& S, const char* what) -> Matrix {
        return checked_llt<double>(S, 0, what).matrixL().solve(Matrix::Identity(S.rows(), S.cols()));
    };
    std::vector<Matrix> diag(n), sub(n > 0 ? n - 1 : 0);
    Matrix carried = whiten(sys.q_blocks[0], "Q_t");  // information on beta_1 from b0
    for (Index t = 0; t < n; ++t) {
        const bool last = t + 1 == n;
        const Index cols = last ? m : 2 * m;
        Matrix A = Matrix::Zero(m + k + (last ? 0 : m), cols);
        A.topLeftCorner(m, m) = carried;
        A.block(m, 0, k, m) = whiten(sys.h_blocks[t], "H_t") * sys.z_blocks[t];
        if (!last) {
            const Matrix W = whiten(sys.q_blocks[t + 1], "Q_t");
            A.block(m + k, 0, m, m) = -W;
            A.block(m + k, m, m, m) = W;
        }
        Eigen::HouseholderQR<Matrix> qr(A);
        Matrix R = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
        for (Index i = 0; i < m; ++i)
            if (R(i, i) < 0.0) R.row(i) *= -1.0;
        diag[t] = R.topLeftCorner(m, m).transpose();
        if (!last) {
            sub[t] = R.topRightCorner(m, m).transpose();
            carried = R.bottomRightCorner(m, m);
        }
    }
    return BlockTridiagonalCholesky<double>::from_factor(std::move(diag), std::move(sub));
}

Vector normal_rhs(const StackedSystem& sys, const Vector* y_adjusted) {
    const Index n = sys.n(), m = sys.m(), k = sys.k();
    Vector rhs(n * m);
    for (Index t = 0; t < n; ++t) {
        const Vector yt = y_adjusted ? Vector(y_adjusted->segment(t * k, k)) : sys.y_blocks[t];
        rhs.segment(t * m, m).noalias() =
            sys.z_blocks[t].transpose() * checked_llt<double>(sys.h_blocks[t], 0, "H_t").solve(yt);
    }
    // (C^{-1})' Q^{-1} b0* touches only the first block.
    rhs.head(m) += checked_llt<double>(sys.q_blocks[0], 0, "Q_1").solve(sys.b0);
    return rhs;
}

void check_dense_cap(const StackedSystem& sys, Index cap) {
    const Index nk = sys.n() * sys.k(), nm = sys.n() * sys.m();
    if (nk > cap || nm > cap)
        throw CapExceededError("dense-validation-only route: n*k = " + std::to_string(nk) +
                               ", n*m = " + std::to_string(nm) + " exceed cap " +
                               std::to_string(cap));
}

DenseForm dense_form(const StackedSystem& sys, Index cap) {
    sys.validate();
    check_dense_cap(sys, cap);
    const Index n = sys.n(), k = sys.k(), m = sys.m();
    DenseForm d;
    d.Z = Matrix::Zero(n * k, n * m);
    d.H = Matrix::Zero(n * k, n * k);
    d.Q = Matrix::Zero(n * m, n * m);
    d.iota = Matrix::Zero(n * k, k);
    for (Index t = 0; t < n; ++t) {
        d.Z.block(t * k, t * m, k, m) = sys.z_blocks[t];
        d.H.block(t * k, t * k, k, k) = sys.h_blocks[t];
        d.Q.block(t * m, t * m, m, m) = sys.q_blocks[t];
        d.iota.block(t * k, 0, k, k).setIdentity();
    }
    // C Q C' = C (C Q)' since Q is symmetric.
    const Matrix CQ = apply_C(d.Q, m);
    d.CQCt = apply_C(Matrix(CQ.transpose()), m);
    d.CQCt = 0.5 * (d.CQCt + d.CQCt.transpose());
    d.Y = sys.y_stacked();
    d.b0_star = sys.b0_star();
    d.C_b0_star = apply_C(d.b0_star, m);
    return d;
}

Matrix compute_omega(const DenseForm& d) {
    Matrix omega = d.H;
    omega.noalias() += d.Z * d.CQCt * d.Z.transpose();
    return 0.5 * (omega + omega.transpose());
}

Matrix compute_omega(const StackedSystem& sys, Index cap) { return compute_omega(dense_form(sys, cap)); }

}  // namespace tvp
