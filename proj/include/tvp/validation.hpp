#ifndef TVP_VALIDATION_HPP
#define TVP_VALIDATION_HPP

// Numerical identity suite: the banded GLS route, the dense Omega formulas and the
// recursive smoother are checked against each other on small random systems.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tvp/model.hpp"
#include "tvp/types.hpp"

namespace tvp {

/// A random stacked system of validation size with time-varying SPD weights.
struct RandomInstance {
    ModelSpec spec;
    StackedSystem sys;
    std::uint64_t seed = 0;
};

/// k in {1,2,3}, p in {1,2}, n in [10, 40]; weights drawn per period.
RandomInstance random_instance(std::uint64_t seed, InterceptMode mode);

/// Instance with fixed dimensions.
RandomInstance random_instance(std::uint64_t seed, Index k, Index p, Index n, InterceptMode mode);

/// Random SPD matrix with eigenvalues bounded away from zero.
template <typename Rng>
Matrix random_spd(Index dim, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix R(dim, dim);
    for (Index j = 0; j < dim; ++j)
        for (Index i = 0; i < dim; ++i) R(i, j) = normal(rng);
    Matrix A = R * R.transpose() / static_cast<double>(dim);
    A.diagonal().array() += 0.5;
    return scale * A;
}

struct IdentityCheck {
    std::string name;
    double deviation = 0.0;
    double tolerance = 0.0;
    bool passed() const { return deviation <= tolerance; }
};

/// Equivalence of estimate_gls, smooth_direct and smooth_recursive (paths, MSE blocks)
/// plus agreement of the banded, dense and prediction-error log-likelihoods.
std::vector<IdentityCheck> check_smoother_equivalence(const StackedSystem& sys,
                                                      Index cap = kDefaultDenseCap);

/// Intercept identities: v^ against the ML formula, the beta^ identity with v^, the
/// variance difference (PSD, equal to the v correction, three-term form), and the
/// derivation checkpoints of the block-inverse argument. Needs time-invariant intercepts.
std::vector<IdentityCheck> check_intercept_identities(const StackedSystem& sys,
                                                      Index cap = kDefaultDenseCap);

/// (S - T U^{-1} V)^{-1} = S^{-1} + S^{-1} T (U - V S^{-1} T)^{-1} V S^{-1} on random inputs.
IdentityCheck check_inversion_lemma(std::uint64_t seed, Index dim_s = 6, Index dim_u = 4);

/// 2x2 block-inverse formula with F = A - B G^{-1} E on random inputs.
IdentityCheck check_block_inverse_lemma(std::uint64_t seed, Index dim_a = 3, Index dim_g = 5);

struct ValidationReport {
    struct Entry {
        std::string name;
        double max_deviation = 0.0;
        double tolerance = 0.0;
        std::uint64_t worst_seed = 0;
        bool passed = true;
    };
    std::vector<Entry> entries;
    int instances = 0;
    bool passed() const;
};

/// Runs every identity on `instances` random systems drawn from `seed`. A set
/// `tolerance` replaces every per-identity default.
ValidationReport run_validation_suite(int instances, std::uint64_t seed,
                                      std::optional<double> tolerance = std::nullopt,
                                      Index cap = kDefaultDenseCap);

}  // namespace tvp

#endif
