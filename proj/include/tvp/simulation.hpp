#ifndef TVP_SIMULATION_HPP
#define TVP_SIMULATION_HPP

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tvp/estimator.hpp"
#include "tvp/types.hpp"

namespace tvp {

/// Error regimes of the Monte Carlo design. The mixture kinds replace the Gaussian state
/// noise by a two-component normal mixture; the sv kinds give each observation error a
/// log-variance following log h_t = rho log h_{t-1} + e_t (rho = 1 for sv_rw).
enum class ErrorKind { gaussian, mixture, sv_rw, sv_ar, mixture_sv_rw, mixture_sv_ar };

std::string to_string(ErrorKind kind);
ErrorKind error_kind_from_string(const std::string& name);

/// One simulation cell.
struct DgpConfig {
    ModelSpec spec{3, 2, 100, InterceptMode::time_varying};
    double h_scale = 1.0;   // observation noise sd
    double q_scale = 0.03;  // state noise sd
    ErrorKind error_kind = ErrorKind::gaussian;
    double bern_p = 0.95;   // probability of the small mixture component
    double sd1 = 0.03;
    double sd2 = 0.1;
    double rho = 0.9;       // used by the autoregressive sv kinds
    double e_sd = 0.02;
    double log_h0 = 0.0;
    double explosion_bound = 1e8;  // paths with any |y| above this are redrawn
    std::uint64_t seed = 1;

    bool has_mixture() const;
    bool has_sv() const;
    /// rho for the sv recursion: 1 for the random-walk kinds, `rho` otherwise.
    double sv_rho() const;
    void validate() const;
};

/// Ratio of state-noise to observation-noise variance per element, q^2 / h^2.
double snr(const DgpConfig& cfg);

struct SimulatedData {
    ObservationSet y;
    CoefficientPath beta_true;      // beta_{p+1}..beta_T
    std::vector<Vector> sv_h;       // h_{i,t} for t = 1..T when the kind has sv, else empty
    int rejections = 0;
};

/// Per-replication random stream, keyed by (seed, replication, attempt).
std::mt19937_64 replication_rng(std::uint64_t seed, std::uint64_t replication, std::uint64_t attempt = 0);

/// One mixture draw: N(0, sd1^2) with probability bern_p, else N(0, sd2^2). Both
/// components are always drawn so the stream position does not depend on the outcome.
double draw_mixture(std::mt19937_64& rng, std::normal_distribution<double>& std_normal,
                    const DgpConfig& cfg, bool* large = nullptr);

/// Draws beta as a driftless random walk from b0* = 0 and y recursively from the TV-VAR.
/// The first p observations are pure noise (zero pre-sample values, beta = 0). Paths with
/// any |y| > explosion_bound are redrawn from the next stream and counted in `rejections`.
SimulatedData simulate_tvvar(const DgpConfig& cfg, std::uint64_t replication = 0);

/// Per-replication comparison of an estimated path against the truth.
struct PathMetrics {
    Vector mean_true, sd_true;
    Vector mean_est, sd_est;
    Vector dist;  // mean_t |beta - beta^|
    Vector rat;   // sd(beta^) / sd(beta); NaN where sd(beta) = 0
    int rat_excluded = 0;
};

PathMetrics compute_metrics(const CoefficientPath& truth, const CoefficientPath& estimate);

/// Table block for one method: per-coefficient replication averages and their medians.
struct MetricTable {
    std::string method;
    Vector m, s, dist, rat;
    double median_m = 0.0, median_s = 0.0, median_dist = 0.0, median_rat = 0.0;
    int n_reps = 0;
    int rejections = 0;
    int rat_excluded = 0;
};

/// Lower median (exact order statistic).
double lower_median(const Vector& x);

struct ReplicationOptions {
    int threads = 1;
    /// Skip estimation and score the true path against itself.
    bool use_true_path = false;
};

struct ReplicationSummary {
    MetricTable truth;                              // m and s of the data-generating path
    std::vector<MetricTable> methods;               // OLS, 1FGLS, 2FGLS (first steps+1)
    std::vector<std::vector<double>> logliks;       // [replication][method]
    int rejections = 0;
    int failures = 0;
};

/// Runs N replications of `cfg`, estimates each with fgls_pipeline(steps), and averages the
/// metrics per coefficient before taking medians. Results depend only on (cfg, N, steps),
/// not on the thread count.
ReplicationSummary run_replications(const DgpConfig& cfg, int N, int steps,
                                    const ReplicationOptions& opts = {});

}  // namespace tvp

#endif
