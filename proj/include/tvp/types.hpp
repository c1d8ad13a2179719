#ifndef TVP_TYPES_HPP
#define TVP_TYPES_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tvp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Input does not satisfy a model contract (shape, finiteness, range).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A factorization or solve broke down. `where()` is the pivot or time index, or -1.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, Index where = -1)
        : std::runtime_error(what), where_(where) {}
    Index where() const { return where_; }

private:
    Index where_;
};

/// Raised by the dense Omega-based routes when the problem is above the validation cap.
class CapExceededError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

enum class InterceptMode { none, time_varying, time_invariant };

std::string to_string(InterceptMode mode);
InterceptMode intercept_mode_from_string(const std::string& name);

/// Dimensions of a TV-(V)AR(p) model with k variables and T observations.
struct ModelSpec {
    Index k = 1;
    Index p = 1;
    Index T = 2;
    InterceptMode intercept_mode = InterceptMode::time_varying;

    /// Coefficient dimension per period.
    Index m() const {
        return intercept_mode == InterceptMode::time_varying ? k * (k * p + 1) : k * k * p;
    }
    /// Effective sample length T - p.
    Index n() const { return T - p; }

    void validate() const;
};

/// T observations y_1..y_T, each of length k. Optional period labels are carried opaquely.
struct ObservationSet {
    std::vector<Vector> y;
    std::vector<std::string> labels;

    Index size() const { return static_cast<Index>(y.size()); }
    Index dim() const { return y.empty() ? 0 : y.front().size(); }
    void validate(Index k, Index T) const;
};

/// beta_{p+1}..beta_T plus optional time-invariant intercepts.
struct CoefficientPath {
    std::vector<Vector> beta;
    std::optional<Vector> v;

    Index n() const { return static_cast<Index>(beta.size()); }
    Index m() const { return beta.empty() ? 0 : beta.front().size(); }

    Vector stacked() const;
    static CoefficientPath from_stacked(const Vector& x, Index m);
};

/// The stacked regression in block form:
///   Y_T = [iota v] + Z beta + eps,  beta = C (b0* + eta).
/// C is never stored; see random_walk.hpp.
struct StackedSystem {
    std::vector<Matrix> z_blocks;  // n blocks, k x m
    std::vector<Vector> y_blocks;  // n blocks, k
    std::vector<Matrix> h_blocks;  // n blocks, k x k SPD
    std::vector<Matrix> q_blocks;  // n blocks, m x m SPD
    Vector b0;                     // m

    Index n() const { return static_cast<Index>(z_blocks.size()); }
    Index k() const { return z_blocks.empty() ? 0 : z_blocks.front().rows(); }
    Index m() const { return z_blocks.empty() ? 0 : z_blocks.front().cols(); }

    /// b0 in the first block, zeros elsewhere (length n*m).
    Vector b0_star() const;
    /// Y_T stacked (length n*k).
    Vector y_stacked() const;

    /// Checks shapes, symmetry and positive definiteness of every weight block.
    void validate() const;
};

}  // namespace tvp

#endif
