#include "tvp/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <thread>

namespace tvp {

std::string to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::gaussian: return "gaussian";
        case ErrorKind::mixture: return "mixture";
        case ErrorKind::sv_rw: return "sv_rw";
        case ErrorKind::sv_ar: return "sv_ar";
        case ErrorKind::mixture_sv_rw: return "mixture_sv_rw";
        case ErrorKind::mixture_sv_ar: return "mixture_sv_ar";
    }
    return "unknown";
}

ErrorKind error_kind_from_string(const std::string& name) {
    for (ErrorKind k : {ErrorKind::gaussian, ErrorKind::mixture, ErrorKind::sv_rw, ErrorKind::sv_ar,
                        ErrorKind::mixture_sv_rw, ErrorKind::mixture_sv_ar})
        if (to_string(k) == name) return k;
    throw ValidationError("error_kind: unknown value '" + name + "'");
}

bool DgpConfig::has_mixture() const {
    return error_kind == ErrorKind::mixture || error_kind == ErrorKind::mixture_sv_rw ||
           error_kind == ErrorKind::mixture_sv_ar;
}

bool DgpConfig::has_sv() const {
    return error_kind != ErrorKind::gaussian && error_kind != ErrorKind::mixture;
}

double DgpConfig::sv_rho() const {
    return (error_kind == ErrorKind::sv_rw || error_kind == ErrorKind::mixture_sv_rw) ? 1.0 : rho;
}

void DgpConfig::validate() const {
    spec.validate();
    if (!(h_scale > 0.0)) throw ValidationError("DgpConfig.h_scale must be > 0");
    if (!(q_scale >= 0.0)) throw ValidationError("DgpConfig.q_scale must be >= 0");
    if (!(bern_p > 0.0 && bern_p < 1.0)) throw ValidationError("DgpConfig.bern_p must lie in (0,1)");
    if (!(sd1 >= 0.0 && sd2 >= 0.0)) throw ValidationError("DgpConfig.sd1/sd2 must be >= 0");
    if (!(rho > 0.0 && rho <= 1.0)) throw ValidationError("DgpConfig.rho must lie in (0,1]");
    if (!(e_sd >= 0.0)) throw ValidationError("DgpConfig.e_sd must be >= 0");
    if (!(explosion_bound > 0.0)) throw ValidationError("DgpConfig.explosion_bound must be > 0");
}

double snr(const DgpConfig& cfg) { return (cfg.q_scale * cfg.q_scale) / (cfg.h_scale * cfg.h_scale); }

std::mt19937_64 replication_rng(std::uint64_t seed, std::uint64_t replication, std::uint64_t attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),        static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32),
                      static_cast<std::uint32_t>(attempt),     static_cast<std::uint32_t>(attempt >> 32)};
    return std::mt19937_64(seq);
}

double draw_mixture(std::mt19937_64& rng, std::normal_distribution<double>& std_normal,
                    const DgpConfig& cfg, bool* large) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double z1 = cfg.sd1 * std_normal(rng);
    const double z2 = cfg.sd2 * std_normal(rng);
    const bool small = u < cfg.bern_p;
    if (large) *large = !small;
    return small ? z1 : z2;
}

namespace {

constexpr int kMaxConsecutiveRejections = 1000;

// One attempt; returns nullopt when the path exceeds the explosion bound.
std::optional<SimulatedData> draw_once(const DgpConfig& cfg, std::mt19937_64& rng) {
    const Index k = cfg.spec.k, p = cfg.spec.p, T = cfg.spec.T, m = cfg.spec.m();
    const bool lead_one = cfg.spec.intercept_mode == InterceptMode::time_varying;
    const Index width = m / k;
    const double sv_rho = cfg.sv_rho();
    std::normal_distribution<double> std_normal(0.0, 1.0);

    SimulatedData out;
    out.y.y.reserve(T);
    out.beta_true.beta.reserve(T - p);
    Vector log_h = Vector::Constant(k, cfg.log_h0);
    Vector beta = Vector::Zero(m);
    Vector eps(k), x(width);

    for (Index t = 0; t < T; ++t) {
        for (Index i = 0; i < k; ++i) {
            if (cfg.has_sv()) {
                log_h(i) = sv_rho * log_h(i) + cfg.e_sd * std_normal(rng);
                eps(i) = cfg.h_scale * std::exp(0.5 * log_h(i)) * std_normal(rng);
            } else {
                eps(i) = cfg.h_scale * std_normal(rng);
            }
        }
        if (cfg.has_sv()) out.sv_h.push_back(log_h.array().exp().matrix());

        Vector yt = eps;
        if (t >= p) {
            for (Index j = 0; j < m; ++j)
                beta(j) += cfg.has_mixture() ? draw_mixture(rng, std_normal, cfg) : cfg.q_scale * std_normal(rng);
            Index c = 0;
            if (lead_one) x(c++) = 1.0;
            for (Index lag = 1; lag <= p; ++lag, c += k) x.segment(c, k) = out.y.y[t - lag];
            for (Index j = 0; j < width; ++j) yt += x(j) * beta.segment(j * k, k);
            out.beta_true.beta.push_back(beta);
        }
        if (!yt.allFinite() || yt.cwiseAbs().maxCoeff() > cfg.explosion_bound) return std::nullopt;
        out.y.y.push_back(std::move(yt));
    }
    return out;
}

}  // namespace

SimulatedData simulate_tvvar(const DgpConfig& cfg, std::uint64_t replication) {
    cfg.validate();
    for (int attempt = 0; attempt <= kMaxConsecutiveRejections; ++attempt) {
        auto rng = replication_rng(cfg.seed, replication, static_cast<std::uint64_t>(attempt));
        if (auto data = draw_once(cfg, rng)) {
            data->rejections = attempt;
            return std::move(*data);
        }
    }
    throw ValidationError("simulate_tvvar: more than " + std::to_string(kMaxConsecutiveRejections) +
                          " consecutive explosive paths; the configuration is not simulable");
}

PathMetrics compute_metrics(const CoefficientPath& truth, const CoefficientPath& estimate) {
    const Index n = truth.n(), m = truth.m();
    if (estimate.n() != n || estimate.m() != m)
        throw ValidationError("compute_metrics: paths differ in shape");
    if (n < 2) throw ValidationError("compute_metrics: need at least two periods");
    PathMetrics pm;
    pm.mean_true = Vector::Zero(m);
    pm.mean_est = Vector::Zero(m);
    for (Index t = 0; t < n; ++t) {
        pm.mean_true += truth.beta[t];
        pm.mean_est += estimate.beta[t];
    }
    pm.mean_true /= static_cast<double>(n);
    pm.mean_est /= static_cast<double>(n);
    Vector ss_true = Vector::Zero(m), ss_est = Vector::Zero(m);
    pm.dist = Vector::Zero(m);
    for (Index t = 0; t < n; ++t) {
        ss_true += (truth.beta[t] - pm.mean_true).array().square().matrix();
        ss_est += (estimate.beta[t] - pm.mean_est).array().square().matrix();
        pm.dist += (truth.beta[t] - estimate.beta[t]).cwiseAbs();
    }
    pm.sd_true = (ss_true / static_cast<double>(n - 1)).cwiseSqrt();
    pm.sd_est = (ss_est / static_cast<double>(n - 1)).cwiseSqrt();
    pm.dist /= static_cast<double>(n);
    pm.rat.resize(m);
    for (Index i = 0; i < m; ++i) {
        if (pm.sd_true(i) > 0.0) {
            pm.rat(i) = pm.sd_est(i) / pm.sd_true(i);
        } else {
            pm.rat(i) = std::numeric_limits<double>::quiet_NaN();
            ++pm.rat_excluded;
        }
    }
    return pm;
}

double lower_median(const Vector& x) {
    if (x.size() == 0) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> v(x.data(), x.data() + x.size());
    const auto mid = v.begin() + (v.size() - 1) / 2;
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

namespace {

struct ReplicationResult {
    PathMetrics truth_only;                   // mean_true / sd_true
    std::vector<PathMetrics> per_method;
    std::vector<double> logliks;
    int rejections = 0;
};

ReplicationResult run_one(const DgpConfig& cfg, std::uint64_t r, int steps, bool use_true_path) {
    SimulatedData data = simulate_tvvar(cfg, r);
    ReplicationResult res;
    res.rejections = data.rejections;
    if (use_true_path) {
        res.per_method.push_back(compute_metrics(data.beta_true, data.beta_true));
        res.logliks.push_back(0.0);
    } else {
        GlsOptions opts;
        opts.compute_mse = false;
        const auto sets = fgls_pipeline(data.y, cfg.spec, steps, std::nullopt, opts);
        for (const auto& est : sets) {
            res.per_method.push_back(compute_metrics(data.beta_true, est.path));
            res.logliks.push_back(est.loglik);
        }
    }
    res.truth_only = res.per_method.front();
    return res;
}

MetricTable finish_table(std::string method, Vector m, Vector s, Vector dist, Vector rat, int n_reps) {
    MetricTable t;
    t.method = std::move(method);
    t.m = std::move(m);
    t.s = std::move(s);
    t.dist = std::move(dist);
    t.rat = std::move(rat);
    t.median_m = lower_median(t.m);
    t.median_s = lower_median(t.s);
    t.median_dist = t.dist.size() ? lower_median(t.dist) : std::numeric_limits<double>::quiet_NaN();
    t.median_rat = t.rat.size() ? lower_median(t.rat) : std::numeric_limits<double>::quiet_NaN();
    t.n_reps = n_reps;
    return t;
}

}  // namespace

ReplicationSummary run_replications(const DgpConfig& cfg, int N, int steps, const ReplicationOptions& opts) {
    if (N < 1) throw ValidationError("run_replications: N must be >= 1");
    if (steps < 0 || steps > 2) throw ValidationError("run_replications: steps must be 0, 1 or 2");
    cfg.validate();

    std::vector<std::optional<ReplicationResult>> results(N);
    std::vector<std::string> errors(N);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < N; r = next++) {
            try {
                results[r] = run_one(cfg, static_cast<std::uint64_t>(r), steps, opts.use_true_path);
            } catch (const std::exception& e) {
                errors[r] = e.what();
            }
        }
    };
    const int threads = std::max(1, std::min(opts.threads, N));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ReplicationSummary summary;
    for (int r = 0; r < N; ++r) {
        if (!results[r]) {
            ++summary.failures;
            std::cerr << "replication " << r << " (seed " << cfg.seed << ") failed: " << errors[r] << "\n";
        }
    }
    if (summary.failures * 20 > N)
        throw NumericalError("run_replications: " + std::to_string(summary.failures) + " of " +
                             std::to_string(N) + " replications failed (more than 5%)");

    const Index m = cfg.spec.m();
    const std::size_t methods = opts.use_true_path ? 1 : static_cast<std::size_t>(steps) + 1;
    Vector m_true = Vector::Zero(m), s_true = Vector::Zero(m);
    std::vector<Vector> m_est(methods, Vector::Zero(m)), s_est(methods, Vector::Zero(m)),
        dist(methods, Vector::Zero(m)), rat(methods, Vector::Zero(m));
    std::vector<Eigen::VectorXi> rat_count(methods, Eigen::VectorXi::Zero(m));
    std::vector<int> rat_excluded(methods, 0);
    int used = 0;
    for (int r = 0; r < N; ++r) {
        if (!results[r]) continue;
        const ReplicationResult& res = *results[r];
        ++used;
        summary.rejections += res.rejections;
        m_true += res.truth_only.mean_true;
        s_true += res.truth_only.sd_true;
        for (std::size_t j = 0; j < methods; ++j) {
            const PathMetrics& pm = res.per_method[j];
            m_est[j] += pm.mean_est;
            s_est[j] += pm.sd_est;
            dist[j] += pm.dist;
            rat_excluded[j] += pm.rat_excluded;
            for (Index i = 0; i < m; ++i) {
                if (std::isfinite(pm.rat(i))) {
                    rat[j](i) += pm.rat(i);
                    ++rat_count[j](i);
                }
            }
        }
        summary.logliks.push_back(res.logliks);
    }
    const double inv = 1.0 / used;
    summary.truth = finish_table("True", m_true * inv, s_true * inv, Vector(), Vector(), used);
    summary.truth.rejections = summary.rejections;
    const Method labels[] = {Method::OLS, Method::FGLS1, Method::FGLS2};
    for (std::size_t j = 0; j < methods; ++j) {
        Vector r(m);
        for (Index i = 0; i < m; ++i)
            r(i) = rat_count[j](i) > 0 ? rat[j](i) / rat_count[j](i) : std::numeric_limits<double>::quiet_NaN();
        Vector finite_rat = r;
        if (rat_excluded[j] > 0) {
            std::vector<double> keep;
            for (Index i = 0; i < m; ++i)
                if (std::isfinite(r(i))) keep.push_back(r(i));
            finite_rat = Eigen::Map<Vector>(keep.data(), static_cast<Index>(keep.size()));
        }
        MetricTable t = finish_table(opts.use_true_path ? "True" : to_string(labels[j]), m_est[j] * inv,
                                     s_est[j] * inv, dist[j] * inv, r, used);
        t.median_rat = lower_median(finite_rat);
        t.rejections = summary.rejections;
        t.rat_excluded = rat_excluded[j];
        summary.methods.push_back(std::move(t));
    }
    return summary;
}

}  // namespace tvp
