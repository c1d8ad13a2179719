#include "tvp/types.hpp"

#include <cmath>

#include "tvp/spd.hpp"

namespace tvp {

std::string to_string(InterceptMode mode) {
    switch (mode) {
        case InterceptMode::none: return "none";
        case InterceptMode::time_varying: return "time_varying";
        case InterceptMode::time_invariant: return "time_invariant";
    }
    return "unknown";
}

InterceptMode intercept_mode_from_string(const std::string& name) {
    if (name == "none") return InterceptMode::none;
    if (name == "time_varying" || name == "tv") return InterceptMode::time_varying;
    if (name == "time_invariant" || name == "ti") return InterceptMode::time_invariant;
    throw ValidationError("intercept_mode: unknown value '" + name + "'");
}

void ModelSpec::validate() const {
    if (k < 1) throw ValidationError("ModelSpec.k must be >= 1, got " + std::to_string(k));
    if (p < 0) throw ValidationError("ModelSpec.p must be >= 0, got " + std::to_string(p));
    if (m() < 1)
        throw ValidationError("ModelSpec.m is zero: p = 0 requires a time-varying intercept");
    if (T <= p) throw ValidationError("ModelSpec.T must exceed p");
    if (n() < 2)
        throw ValidationError("ModelSpec.T: effective sample length T - p = " +
                              std::to_string(n()) + " must be >= 2");
}

void ObservationSet::validate(Index k, Index T) const {
    if (size() != T)
        throw ValidationError("ObservationSet.y: expected " + std::to_string(T) +
                              " observations, got " + std::to_string(size()));
    for (Index t = 0; t < size(); ++t) {
        if (y[t].size() != k)
            throw ValidationError("ObservationSet.y[" + std::to_string(t) + "]: expected length " +
                                  std::to_string(k) + ", got " + std::to_string(y[t].size()));
        if (!y[t].allFinite())
            throw ValidationError("ObservationSet.y[" + std::to_string(t) + "]: non-finite value");
    }
    if (!labels.empty() && static_cast<Index>(labels.size()) != T)
        throw ValidationError("ObservationSet.labels: length does not match y");
}

Vector CoefficientPath::stacked() const {
    const Index mm = m();
    Vector out(n() * mm);
    for (Index t = 0; t < n(); ++t) out.segment(t * mm, mm) = beta[t];
    return out;
}

CoefficientPath CoefficientPath::from_stacked(const Vector& x, Index m) {
    if (m <= 0 || x.size() % m != 0)
        throw ValidationError("CoefficientPath: stacked length is not a multiple of m");
    CoefficientPath path;
    const Index n = x.size() / m;
    path.beta.reserve(n);
    for (Index t = 0; t < n; ++t) path.beta.push_back(x.segment(t * m, m));
    return path;
}

Vector StackedSystem::b0_star() const {
    Vector out = Vector::Zero(n() * m());
    out.head(m()) = b0;
    return out;
}

Vector StackedSystem::y_stacked() const {
    const Index kk = k();
    Vector out(n() * kk);
    for (Index t = 0; t < n(); ++t) out.segment(t * kk, kk) = y_blocks[t];
    return out;
}

void StackedSystem::validate() const {
    const Index nn = n();
    if (nn < 1) throw ValidationError("StackedSystem.z_blocks: empty");
    const Index kk = k(), mm = m();
    if (kk < 1 || mm < 1) throw ValidationError("StackedSystem.z_blocks: zero-sized block");
    auto count = [&](std::size_t got, const char* field) {
        if (static_cast<Index>(got) != nn)
            throw ValidationError(std::string("StackedSystem.") + field + ": expected " +
                                  std::to_string(nn) + " blocks, got " + std::to_string(got));
    };
    count(y_blocks.size(), "y_blocks");
    count(h_blocks.size(), "h_blocks");
    count(q_blocks.size(), "q_blocks");
    if (b0.size() != mm)
        throw ValidationError("StackedSystem.b0: expected length " + std::to_string(mm));
    for (Index t = 0; t < nn; ++t) {
        const std::string at = "[" + std::to_string(t) + "]";
        if (z_blocks[t].rows() != kk || z_blocks[t].cols() != mm)
            throw ValidationError("StackedSystem.z_blocks" + at + ": shape mismatch");
        if (y_blocks[t].size() != kk)
            throw ValidationError("StackedSystem.y_blocks" + at + ": length mismatch");
        if (h_blocks[t].rows() != kk || h_blocks[t].cols() != kk)
            throw ValidationError("StackedSystem.h_blocks" + at + ": shape mismatch");
        if (q_blocks[t].rows() != mm || q_blocks[t].cols() != mm)
            throw ValidationError("StackedSystem.q_blocks" + at + ": shape mismatch");
        for (const Matrix* w : {&h_blocks[t], &q_blocks[t]}) {
            const double scale = std::max(w->cwiseAbs().maxCoeff(), 1e-300);
            if ((*w - w->transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
                throw ValidationError("StackedSystem weight block" + at + " is not symmetric");
            if (first_failing_pivot(*w) >= 0)
                throw ValidationError("StackedSystem weight block" + at +
                                      " is not positive definite");
        }
    }
}

Regularized regularize_spd(const Matrix& A, const char* what) {
    Regularized out;
    out.value = 0.5 * (A + A.transpose());
    if (cholesky_succeeds<double>(out.value)) return out;
    const Index dim = out.value.rows();
    const double jitter = 1e-10 * out.value.trace() / static_cast<double>(dim);
    out.value.diagonal().array() += jitter;
    out.jittered = true;
    const Index pivot = first_failing_pivot(out.value);
    if (!cholesky_succeeds<double>(out.value) || !(jitter > 0.0))
        throw NumericalError(std::string(what) + " is not positive definite after jitter (pivot " +
                                 std::to_string(pivot < 0 ? 0 : pivot) + ")",
                             pivot < 0 ? 0 : pivot);
    return out;
}

}  // namespace tvp
