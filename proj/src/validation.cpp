#include "tvp/validation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tvp/block_tridiagonal.hpp"
#include "tvp/estimator.hpp"
#include "tvp/random_walk.hpp"
#include "tvp/smoother.hpp"
#include "tvp/spd.hpp"

namespace tvp {

namespace {

constexpr double kPathTol = 1e-8;
constexpr double kMseTol = 1e-7;
constexpr double kIdentityTol = 1e-8;
constexpr double kLoglikTol = 1e-6;
constexpr double kAssemblyTol = 1e-12;
constexpr double kPsdTol = 1e-10;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

double blocks_rel_diff(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    double num = 0.0, den = 1e-300;
    for (std::size_t t = 0; t < a.size(); ++t) {
        num = std::max(num, (a[t] - b[t]).cwiseAbs().maxCoeff());
        den = std::max(den, b[t].cwiseAbs().maxCoeff());
    }
    return num / den;
}

std::vector<Matrix> diagonal_blocks(const Matrix& M, Index n, Index m) {
    std::vector<Matrix> out;
    out.reserve(n);
    for (Index t = 0; t < n; ++t) out.push_back(M.block(t * m, t * m, m, m));
    return out;
}

Matrix spd_inverse(const Matrix& A, const char* what) {
    return checked_llt<double>(A, 0, what).solve(Matrix::Identity(A.rows(), A.cols()));
}

Matrix block_diag_inverse(const std::vector<Matrix>& blocks) {
    const Index n = static_cast<Index>(blocks.size()), d = blocks.front().rows();
    Matrix out = Matrix::Zero(n * d, n * d);
    for (Index t = 0; t < n; ++t) out.block(t * d, t * d, d, d) = spd_inverse(blocks[t], "weight block");
    return out;
}

}  // namespace

RandomInstance random_instance(std::uint64_t seed, Index k, Index p, Index n, InterceptMode mode) {
    auto rng = make_rng(seed, 0x5eed);
    std::normal_distribution<double> normal(0.0, 1.0);
    RandomInstance inst;
    inst.seed = seed;
    inst.spec = ModelSpec{k, p, n + p, mode};
    ObservationSet y;
    for (Index t = 0; t < inst.spec.T; ++t) {
        Vector v(k);
        for (Index i = 0; i < k; ++i) v(i) = normal(rng);
        y.y.push_back(v);
    }
    const Index m = inst.spec.m();
    inst.sys.z_blocks = build_regressors(y, inst.spec);
    inst.sys.y_blocks.assign(y.y.begin() + p, y.y.end());
    std::uniform_real_distribution<double> unif(0.3, 1.5);
    for (Index t = 0; t < n; ++t) {
        inst.sys.h_blocks.push_back(random_spd(k, rng, unif(rng)));
        inst.sys.q_blocks.push_back(random_spd(m, rng, 0.2 * unif(rng)));
    }
    inst.sys.b0 = Vector(m);
    for (Index i = 0; i < m; ++i) inst.sys.b0(i) = 0.5 * normal(rng);
    return inst;
}

RandomInstance random_instance(std::uint64_t seed, InterceptMode mode) {
    auto rng = make_rng(seed, 0xd1);
    std::uniform_int_distribution<int> kd(1, 3), pd(1, 2), nd(10, 40);
    const Index k = kd(rng), p = pd(rng), n = nd(rng);
    return random_instance(seed, k, p, n, mode);
}

std::vector<IdentityCheck> check_smoother_equivalence(const StackedSystem& sys, Index cap) {
    std::vector<IdentityCheck> out;
    const Index n = sys.n(), m = sys.m();

    const EstimateSet gls = estimate_gls(sys);
    const SmoothedResult direct = smooth_direct(sys, cap);
    const SmoothedResult recursive = smooth_recursive(sys);
    const Vector b_gls = gls.path.stacked();
    const Vector b_dir = direct.beta_tilde.stacked();
    const Vector b_rec = recursive.beta_tilde.stacked();

    out.push_back({"path: GLS vs direct smoother", max_rel_diff(b_gls, b_dir), kPathTol});
    out.push_back({"path: recursive vs direct smoother", max_rel_diff(b_rec, b_dir), kPathTol});
    out.push_back({"path: GLS vs recursive smoother", max_rel_diff(b_gls, b_rec), kPathTol});
    out.push_back({"mse: GLS vs direct smoother", blocks_rel_diff(gls.mse_blocks, direct.mse_blocks), kMseTol});
    out.push_back({"mse: recursive vs direct smoother",
                   blocks_rel_diff(recursive.mse_blocks, direct.mse_blocks), kMseTol});

    const double ll_dense = log_likelihood_dense(sys, std::nullopt, cap);
    out.push_back({"loglik: banded vs dense", std::abs(gls.loglik - ll_dense), kLoglikTol});
    out.push_back({"loglik: prediction errors vs dense", std::abs(recursive.loglik - ll_dense), kLoglikTol});

    // Blockwise normal matrix against dense assembly with materialized C^{-1}.
    const DenseForm d = dense_form(sys, cap);
    const Matrix Cinv = apply_C_inverse(Matrix(Matrix::Identity(n * m, n * m)), m);
    const Matrix Hinv = block_diag_inverse(sys.h_blocks);
    const Matrix Qinv = block_diag_inverse(sys.q_blocks);
    const Matrix G_dense = d.Z.transpose() * Hinv * d.Z + Cinv.transpose() * Qinv * Cinv;
    const BlockTridiagonal<double> G = normal_matrix(sys);
    out.push_back({"normal matrix: blockwise vs dense", max_rel_diff(G.to_dense(), G_dense), kAssemblyTol});

    const Matrix rhs = d.Z.transpose() * Hinv * d.Y + Cinv.transpose() * Qinv * d.b0_star;
    out.push_back({"solver: banded vs dense Cholesky",
                   max_rel_diff(solve_spd(G, rhs), solve_spd(G_dense, rhs)), kPathTol});
    const BlockTridiagonalCholesky<double> qr = factor_normal_matrix(sys);
    out.push_back({"solver: square-root factor vs dense Cholesky",
                   max_rel_diff(qr.solve(rhs), solve_spd(G_dense, rhs)), kPathTol});
    out.push_back({"log-determinant: square-root factor vs normal-matrix Cholesky",
                   std::abs(qr.log_determinant() - BlockTridiagonalCholesky<double>(G).log_determinant()),
                   kLoglikTol});
    return out;
}

std::vector<IdentityCheck> check_intercept_identities(const StackedSystem& sys, Index cap) {
    std::vector<IdentityCheck> out;
    const Index n = sys.n(), k = sys.k(), m = sys.m();
    const DenseForm d = dense_form(sys, cap);
    const Matrix Inm = Matrix::Identity(n * m, n * m);
    const Matrix C = apply_C(Inm, m);
    const Matrix Cinv = apply_C_inverse(Inm, m);
    const Matrix Hinv = block_diag_inverse(sys.h_blocks);
    const Matrix Qinv = block_diag_inverse(sys.q_blocks);
    const Matrix& Z = d.Z;
    const Matrix& I = d.iota;
    const Matrix& CQC = d.CQCt;

    const Matrix omega = compute_omega(d);
    const Matrix Oinv = spd_inverse(omega, "Omega");
    const Matrix G = Z.transpose() * Hinv * Z + Cinv.transpose() * Qinv * Cinv;
    const Matrix Ginv = spd_inverse(G, "G");
    const Matrix A = I.transpose() * Hinv * I;
    const Matrix B = I.transpose() * Hinv * Z;
    const Matrix E = B.transpose();
    const Matrix F = A - B * Ginv * E;
    const Matrix Finv = spd_inverse(F, "F");
    const Matrix IOI_inv = spd_inverse(Matrix(I.transpose() * Oinv * I), "iota' Omega^{-1} iota");
    const Vector y_dev = d.Y - Z * d.C_b0_star;

    // v^ by the ML formula (from the likelihood normal equations).
    const Vector v_ml = IOI_inv * I.transpose() * Oinv * y_dev;

    // Joint GLS, dense: invert the full [v; beta] normal matrix.
    Matrix joint(k + n * m, k + n * m);
    joint << A, B, E, G;
    const Matrix joint_inv = spd_inverse(joint, "joint normal matrix");
    Vector joint_rhs(k + n * m);
    joint_rhs << I.transpose() * Hinv * d.Y, Z.transpose() * Hinv * d.Y + Cinv.transpose() * Qinv * d.b0_star;
    const Vector joint_sol = joint_inv * joint_rhs;

    // Banded production route.
    const EstimateSet est = estimate_with_intercepts(sys);

    out.push_back({"v^: banded joint GLS vs ML formula", max_rel_diff(*est.v_hat, v_ml), kIdentityTol});
    out.push_back({"v^: dense joint GLS vs ML formula", max_rel_diff(Vector(joint_sol.head(k)), v_ml), kIdentityTol});
    out.push_back({"v^ covariance: banded vs (iota'Omega^{-1}iota)^{-1}", max_rel_diff(*est.v_cov, IOI_inv), kIdentityTol});

    const Vector beta_identity = d.C_b0_star + CQC * Z.transpose() * Oinv * (d.Y - I * *est.v_hat - Z * d.C_b0_star);
    out.push_back({"beta^: smoothed form with v^", max_rel_diff(est.path.stacked(), beta_identity), kIdentityTol});
    out.push_back({"beta^: dense joint GLS vs banded", max_rel_diff(est.path.stacked(), Vector(joint_sol.tail(n * m))), kIdentityTol});

    const Matrix var_kalman = smoothed_variance(sys, VarianceMode::kalman, cap);
    const Matrix var_gls = smoothed_variance(sys, VarianceMode::gls, cap);
    const Matrix var_beta_hat = joint_inv.bottomRightCorner(n * m, n * m);
    const Matrix cov_beta_v = joint_inv.bottomLeftCorner(n * m, k);
    const Matrix var_v = joint_inv.topLeftCorner(k, k);
    out.push_back({"Var(beta|Y): smoothed form vs G^{-1}", max_rel_diff(var_kalman, Ginv), kIdentityTol});
    out.push_back({"Var(beta^): smoothed form vs joint inverse", max_rel_diff(var_gls, var_beta_hat), kIdentityTol});

    const Matrix correction = CQC * Z.transpose() * Oinv * I * IOI_inv * I.transpose() * Oinv * Z * CQC;
    out.push_back({"Var(beta^) - Var(beta|Y) equals v correction",
                   max_rel_diff(Matrix(var_beta_hat - Ginv), correction), kIdentityTol});
    const Matrix diff = var_gls - var_kalman;
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (diff + diff.transpose()), Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
    out.push_back({"Var(beta^) - Var(beta|Y) is PSD",
                   std::max(0.0, -min_eig) / std::max(var_gls.cwiseAbs().maxCoeff(), 1e-300), kPsdTol});
    const Matrix three_term = var_beta_hat - cov_beta_v * spd_inverse(var_v, "Var(v^)") * cov_beta_v.transpose();
    out.push_back({"three-term correction recovers Var(beta|Y)", max_rel_diff(three_term, var_kalman), kIdentityTol});
    out.push_back({"zero Var(v^) collapses the two variances",
                   max_rel_diff(smoothed_variance(sys, VarianceMode::gls, cap, true), var_kalman),
                   kIdentityTol});
    out.push_back({"banded Var(beta|Y) blocks vs smoothed form",
                   blocks_rel_diff(est.mse_blocks, diagonal_blocks(var_kalman, n, m)), kIdentityTol});
    out.push_back({"banded Var(beta^) blocks vs smoothed form",
                   blocks_rel_diff(est.var_blocks, diagonal_blocks(var_gls, n, m)), kIdentityTol});

    // Derivation checkpoints.
    const Matrix Ink = Matrix::Identity(n * k, n * k);
    const Matrix GinvE = Ginv * E;
    const Matrix FinvBGinv = Finv * B * Ginv;
    const Matrix cp1_lhs = Finv * I.transpose() * Hinv - FinvBGinv * Z.transpose() * Hinv;
    const Matrix cp1_rhs = IOI_inv * I.transpose() * Oinv;
    out.push_back({"checkpoint 1: Y_T coefficient of v^", max_rel_diff(cp1_lhs, cp1_rhs), kIdentityTol});

    const Matrix cp2_lhs = FinvBGinv * Cinv.transpose() * Qinv;
    const Matrix cp2_rhs = IOI_inv * I.transpose() * Oinv * Z * C;
    out.push_back({"checkpoint 2: b0* coefficient of v^", max_rel_diff(cp2_lhs, cp2_rhs), kIdentityTol});

    const Matrix lower_right = Ginv + GinvE * Finv * B * Ginv;
    const Matrix cp3_lhs = -GinvE * Finv * I.transpose() * Hinv + lower_right * Z.transpose() * Hinv;
    const Matrix cp3_rhs = CQC * Z.transpose() * Oinv * (Ink - I * IOI_inv * I.transpose() * Oinv);
    out.push_back({"checkpoint 3: Y_T coefficient of beta^", max_rel_diff(cp3_lhs, cp3_rhs), kIdentityTol});

    const Matrix cp4_lhs = lower_right * Cinv.transpose() * Qinv;
    const Matrix cp4_rhs =
        (Inm - CQC * Z.transpose() * Oinv * Z + CQC * Z.transpose() * Oinv * I * IOI_inv * I.transpose() * Oinv * Z) * C;
    out.push_back({"checkpoint 4: b0* coefficient of beta^", max_rel_diff(cp4_lhs, cp4_rhs), kIdentityTol});

    out.push_back({"F^{-1} = (iota'Omega^{-1}iota)^{-1}", max_rel_diff(Finv, IOI_inv), kIdentityTol});
    out.push_back({"G^{-1} = CQC' - CQC'Z'Omega^{-1}ZCQC'",
                   max_rel_diff(Ginv, Matrix(CQC - CQC * Z.transpose() * Oinv * Z * CQC)), kIdentityTol});
    out.push_back({"Omega^{-1} = H^{-1} - H^{-1}ZG^{-1}Z'H^{-1}",
                   max_rel_diff(Oinv, Matrix(Hinv - Hinv * Z * Ginv * Z.transpose() * Hinv)), kIdentityTol});
    out.push_back({"-F^{-1}BG^{-1} reduction",
                   max_rel_diff(Matrix(-FinvBGinv), Matrix(-IOI_inv * I.transpose() * Oinv * Z * CQC)), kIdentityTol});
    out.push_back({"-G^{-1}EF^{-1} reduction",
                   max_rel_diff(Matrix(-GinvE * Finv), Matrix(-CQC * Z.transpose() * Oinv * I * IOI_inv)), kIdentityTol});
    out.push_back({"Cov(beta^, v^) from the joint inverse", max_rel_diff(cov_beta_v, Matrix(-GinvE * Finv)), kIdentityTol});

    const double ll_banded = log_likelihood(sys, est.v_hat);
    const double ll_dense = log_likelihood_dense(sys, est.v_hat, cap);
    out.push_back({"loglik with v^: banded vs dense", std::abs(ll_banded - ll_dense), kLoglikTol});
    return out;
}

IdentityCheck check_inversion_lemma(std::uint64_t seed, Index dim_s, Index dim_u) {
    auto rng = make_rng(seed, 0x1e33a1);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Matrix S = random_spd(dim_s, rng, 2.0);
    const Matrix U = random_spd(dim_u, rng, 2.0);
    Matrix T(dim_s, dim_u), V(dim_u, dim_s);
    for (Index j = 0; j < dim_u; ++j)
        for (Index i = 0; i < dim_s; ++i) T(i, j) = 0.3 * normal(rng);
    for (Index j = 0; j < dim_s; ++j)
        for (Index i = 0; i < dim_u; ++i) V(i, j) = 0.3 * normal(rng);
    const Matrix Sinv = S.inverse();
    const Matrix lhs = (S - T * U.inverse() * V).inverse();
    const Matrix rhs = Sinv + Sinv * T * (U - V * Sinv * T).inverse() * V * Sinv;
    return {"inversion lemma", max_rel_diff(lhs, rhs), kIdentityTol};
}

IdentityCheck check_block_inverse_lemma(std::uint64_t seed, Index dim_a, Index dim_g) {
    auto rng = make_rng(seed, 0xb10c);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Matrix full = random_spd(dim_a + dim_g, rng, 1.0);
    Matrix M = full;
    // Perturb the off-diagonal blocks asymmetrically; the lemma does not need symmetry.
    for (Index j = 0; j < dim_g; ++j)
        for (Index i = 0; i < dim_a; ++i) M(i, dim_a + j) += 0.1 * normal(rng);
    const Matrix A = M.topLeftCorner(dim_a, dim_a), B = M.topRightCorner(dim_a, dim_g);
    const Matrix E = M.bottomLeftCorner(dim_g, dim_a), G = M.bottomRightCorner(dim_g, dim_g);
    const Matrix Ginv = G.inverse();
    const Matrix Finv = (A - B * Ginv * E).inverse();
    Matrix formula(dim_a + dim_g, dim_a + dim_g);
    formula << Finv, -Finv * B * Ginv, -Ginv * E * Finv, Ginv + Ginv * E * Finv * B * Ginv;
    return {"block inverse lemma", max_rel_diff(formula, Matrix(M.inverse())), kIdentityTol};
}

bool ValidationReport::passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const Entry& e) { return e.passed; });
}

ValidationReport run_validation_suite(int instances, std::uint64_t seed, std::optional<double> tolerance,
                                      Index cap) {
    ValidationReport report;
    report.instances = instances;
    std::map<std::string, std::size_t> slot;
    auto record = [&](const IdentityCheck& c, std::uint64_t inst_seed) {
        auto [it, inserted] = slot.try_emplace(c.name, report.entries.size());
        if (inserted) report.entries.push_back({c.name, 0.0, tolerance.value_or(c.tolerance), inst_seed, true});
        auto& e = report.entries[it->second];
        if (inserted || c.deviation > e.max_deviation || std::isnan(c.deviation)) {
            e.max_deviation = c.deviation;
            e.worst_seed = inst_seed;
        }
        if (!(c.deviation <= e.tolerance)) e.passed = false;
    };
    for (int r = 0; r < instances; ++r) {
        const std::uint64_t inst_seed = seed * 1000003ULL + static_cast<std::uint64_t>(r);
        const RandomInstance tv = random_instance(inst_seed, InterceptMode::time_varying);
        for (const auto& c : check_smoother_equivalence(tv.sys, cap)) record(c, inst_seed);
        const RandomInstance ti = random_instance(inst_seed, InterceptMode::time_invariant);
        for (const auto& c : check_intercept_identities(ti.sys, cap)) record(c, inst_seed);
        record(check_inversion_lemma(inst_seed), inst_seed);
        record(check_block_inverse_lemma(inst_seed), inst_seed);
    }
    return report;
}

}  // namespace tvp
