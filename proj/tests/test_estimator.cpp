#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "tvp/estimator.hpp"
#include "tvp/random_walk.hpp"
#include "tvp/smoother.hpp"
#include "tvp/spd.hpp"
#include "tvp/validation.hpp"

using namespace tvp;

namespace {

// Stable constant VAR(1): y_t = c + A y_{t-1} + e_t.
ObservationSet var1(const Vector& c, const Matrix& A, Index T, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sd);
    ObservationSet y;
    Vector prev = Vector::Zero(c.size());
    for (Index t = 0; t < T; ++t) {
        Vector e(c.size());
        for (Index i = 0; i < e.size(); ++i) e(i) = normal(rng);
        prev = c + A * prev + e;
        y.y.push_back(prev);
    }
    return y;
}

Matrix two_by_two(double a, double b, double c, double d) {
    Matrix M(2, 2);
    M << a, b, c, d;
    return M;
}

double min_eigenvalue(const Matrix& A) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (A + A.transpose())).eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("uninformative data returns C b0*") {
    auto sys = test::scalar_system({1.0, -2.0, 3.0, 0.5}, {0.0, 0.0, 0.0, 0.0}, 1.0, 1.0, 1.5);
    auto est = estimate_gls(sys);
    for (const auto& b : est.path.beta) CHECK(b(0) == doctest::Approx(1.5));
}

TEST_CASE("two-period system by hand") {
    auto sys = test::scalar_system({1.0, 2.0}, {1.0, 1.0}, 1.0, 1.0, 0.0);
    auto est = estimate_gls(sys);
    CHECK(est.path.beta[0](0) == doctest::Approx(0.8));
    CHECK(est.path.beta[1](0) == doctest::Approx(1.4));
    // Inverse of [[3,-1],[-1,2]] has diagonal (2/5, 3/5).
    CHECK(est.mse_blocks[0](0, 0) == doctest::Approx(0.4));
    CHECK(est.mse_blocks[1](0, 0) == doctest::Approx(0.6));
}

TEST_CASE("local level path minimizes the penalized sum of squares") {
    const std::vector<double> y = {0.3, 1.1, 0.4, 2.0, 1.7, 1.2, 0.1, -0.5, 0.0, 0.8};
    const double h = 0.5, q = 0.2, b0 = 0.25;
    auto sys = test::scalar_system(y, std::vector<double>(y.size(), 1.0), h, q, b0);
    auto beta = estimate_gls(sys).path.stacked();
    const std::size_t n = y.size();
    // Gradient of sum (y_t - b_t)^2 / h + sum (b_t - b_{t-1})^2 / q.
    for (std::size_t t = 0; t < n; ++t) {
        const double prev = t == 0 ? b0 : beta(t - 1);
        double g = -2.0 * (y[t] - beta(t)) / h + 2.0 * (beta(t) - prev) / q;
        if (t + 1 < n) g -= 2.0 * (beta(t + 1) - beta(t)) / q;
        CHECK(std::abs(g) < 1e-10);
    }
}

TEST_CASE("GLS agrees with the direct smoother and is weight-scale invariant") {
    auto inst = random_instance(3, 2, 2, 20, InterceptMode::time_varying);
    auto gls = estimate_gls(inst.sys);
    CHECK(max_rel_diff(gls.path.stacked(), smooth_direct(inst.sys).beta_tilde.stacked()) < 1e-8);

    auto ols = estimate_ols(inst.sys);
    auto unit = estimate_gls(with_weights(inst.sys, Matrix::Identity(inst.sys.k(), inst.sys.k()),
                                          Matrix::Identity(inst.sys.m(), inst.sys.m())));
    CHECK(max_rel_diff(ols.path.stacked(), unit.path.stacked()) == 0.0);

    for (double c : {0.01, 7.5, 1e3}) {
        StackedSystem scaled = inst.sys;
        for (auto& H : scaled.h_blocks) H *= c;
        for (auto& Q : scaled.q_blocks) Q *= c;
        CHECK(max_rel_diff(estimate_gls(scaled).path.stacked(), gls.path.stacked()) < 1e-10);
    }
}

TEST_CASE("time-invariant intercept against the dense formula") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto inst = random_instance(seed, InterceptMode::time_invariant);
        auto est = estimate_with_intercepts(inst.sys);
        REQUIRE(est.v_hat.has_value());
        DenseForm d = dense_form(inst.sys);
        Eigen::LLT<Matrix> omega(compute_omega(d));
        const Matrix F = d.iota.transpose() * omega.solve(d.iota);
        const Vector v = F.llt().solve(Vector(d.iota.transpose() * omega.solve(Vector(d.Y - d.Z * d.C_b0_star))));
        CHECK(max_rel_diff(*est.v_hat, v) < 1e-8);
        CHECK(max_rel_diff(*est.v_cov, Matrix(F.inverse())) < 1e-8);

        for (const auto& c : check_intercept_identities(inst.sys)) {
            INFO(c.name);
            CHECK(c.passed());
        }
    }
}

TEST_CASE("intercept estimate is centred on zero when the true intercept is zero") {
    const Index n = 200;
    int inside = 0;
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        std::mt19937_64 rng(1000 + s);
        std::normal_distribution<double> normal;
        std::vector<double> y(n), z(n);
        double beta = 0.5;
        for (Index t = 0; t < n; ++t) {
            beta += 0.1 * normal(rng);
            z[t] = normal(rng);
            y[t] = z[t] * beta + normal(rng);
        }
        auto sys = test::scalar_system(y, z, 1.0, 0.01, 0.5);
        auto est = estimate_with_intercepts(sys);
        const double se = std::sqrt((*est.v_cov)(0, 0));
        if (std::abs((*est.v_hat)(0)) < 3.0 * se) ++inside;
    }
    CHECK(inside >= 198);
}

TEST_CASE("smoothed variance") {
    auto inst = random_instance(8, InterceptMode::time_invariant);
    const Index n = inst.sys.n(), m = inst.sys.m();
    Matrix kal = smoothed_variance(inst.sys, VarianceMode::kalman);
    Matrix gls = smoothed_variance(inst.sys, VarianceMode::gls);
    Matrix zero_v = smoothed_variance(inst.sys, VarianceMode::gls, kDefaultDenseCap, true);
    CHECK(max_rel_diff(zero_v, kal) < 1e-12);
    CHECK(min_eigenvalue(gls - kal) > -1e-10);
    CHECK(min_eigenvalue(kal) > -1e-10);

    auto est = estimate_with_intercepts(inst.sys);
    for (Index t = 0; t < n; ++t) {
        CHECK(max_rel_diff(est.mse_blocks[t], Matrix(kal.block(t * m, t * m, m, m))) < 1e-7);
        CHECK(max_rel_diff(est.var_blocks[t], Matrix(gls.block(t * m, t * m, m, m))) < 1e-7);
    }
}

TEST_CASE("residual covariances") {
    // A constant path that fits every observation exactly.
    auto sys = test::scalar_system({2.0, 4.0, -1.0}, {1.0, 2.0, -0.5}, 1.0, 1.0, 2.0);
    EstimateSet est;
    est.path.beta.assign(3, Vector::Constant(1, 2.0));
    auto raw = raw_residual_covariances(est, sys);
    CHECK(raw.h_hat(0, 0) == 0.0);
    CHECK(raw.q_hat(0, 0) == 0.0);
    // Trace-scaled jitter cannot rescue an exactly zero matrix.
    CHECK_THROWS_AS(residual_covariances(est, sys), NumericalError);

    auto two = test::scalar_system({0.0, 0.0}, {0.0, 0.0}, 1.0, 1.0, 0.0);
    est.path.beta.assign(2, Vector::Constant(1, 2.0));
    raw = raw_residual_covariances(est, two);
    CHECK(raw.q_hat(0, 0) == doctest::Approx(2.0));
    CHECK(raw.h_hat(0, 0) == 0.0);

    est.path.beta.assign(5, Vector::Constant(1, 0.0));
    CHECK_THROWS_AS(raw_residual_covariances(est, two), ValidationError);
}

TEST_CASE("log-likelihood") {
    auto one = test::scalar_system({0.0}, {0.0}, 1.0, 1.0, 0.0);
    CHECK(log_likelihood(one) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));

    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto inst = random_instance(seed, InterceptMode::time_varying);
        CHECK(log_likelihood(inst.sys) == doctest::Approx(log_likelihood_dense(inst.sys)).epsilon(1e-9));
    }

    auto base = test::scalar_system({0.5, -0.3, 0.9}, {0.0, 0.0, 0.0}, 1.0, 1.0, 0.0);
    auto wider = test::scalar_system({1.0, -0.6, 1.8}, {0.0, 0.0, 0.0}, 1.0, 1.0, 0.0);
    CHECK(log_likelihood(wider) < log_likelihood(base));
    CHECK_THROWS_AS(log_likelihood(base, Vector::Zero(2)), ValidationError);
}

TEST_CASE("constant VAR fit") {
    const Vector c = (Vector(2) << 0.5, -0.2).finished();
    const Matrix A = two_by_two(0.5, 0.1, -0.2, 0.3);
    auto y = var1(c, A, 20000, 5, 0.1);
    ModelSpec spec{2, 1, 20000, InterceptMode::time_varying};
    Vector b = fit_constant_var(y, spec);
    REQUIRE(b.size() == 6);
    CHECK(b.segment(0, 2).isApprox(c, 0.05));
    // vec of [c, A]: column j of A sits at offset 2 + 2j.
    CHECK(std::abs(b(2) - A(0, 0)) < 0.02);
    CHECK(std::abs(b(3) - A(1, 0)) < 0.02);
    CHECK(std::abs(b(4) - A(0, 1)) < 0.02);
    CHECK(std::abs(b(5) - A(1, 1)) < 0.02);

    spec.intercept_mode = InterceptMode::time_invariant;
    CHECK(fit_constant_var(y, spec).size() == 4);

    ObservationSet flat;
    flat.y.assign(30, Vector::Constant(2, 1.0));
    CHECK_THROWS_AS(fit_constant_var(flat, ModelSpec{2, 1, 30, InterceptMode::time_varying}), ValidationError);
}

TEST_CASE("FGLS pipeline") {
    auto y = var1((Vector(2) << 0.1, 0.0).finished(), two_by_two(0.4, 0.1, 0.0, 0.3), 80, 9);
    ModelSpec spec{2, 1, 80, InterceptMode::time_varying};

    auto only_ols = fgls_pipeline(y, spec, 0);
    REQUIRE(only_ols.size() == 1);
    CHECK(only_ols[0].method == Method::OLS);
    REQUIRE(only_ols[0].covariances.has_value());

    auto full = fgls_pipeline(y, spec, 2);
    REQUIRE(full.size() == 3);
    CHECK(full[1].method == Method::FGLS1);
    CHECK(full[2].method == Method::FGLS2);
    CHECK(max_rel_diff(full[0].path.stacked(), only_ols[0].path.stacked()) == 0.0);
    CHECK(max_rel_diff(full[1].h_used, full[0].covariances->h_hat) == 0.0);
    CHECK(max_rel_diff(full[2].q_used, full[1].covariances->q_hat) == 0.0);

    auto again = fgls_pipeline(y, spec, 2);
    for (int i = 0; i < 3; ++i) {
        CHECK(again[i].path.stacked() == full[i].path.stacked());
        CHECK(again[i].loglik == full[i].loglik);
    }

    spec.intercept_mode = InterceptMode::time_invariant;
    auto with_v = fgls_pipeline(y, spec, 1);
    CHECK(with_v[1].v_hat.has_value());

    CHECK_THROWS_AS(fgls_pipeline(y, spec, 3), ValidationError);
    CHECK_THROWS_AS(fgls_pipeline(y, spec, -1), ValidationError);
}
