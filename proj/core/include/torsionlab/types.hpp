#ifndef TORSIONLAB_TYPES_HPP
#define TORSIONLAB_TYPES_HPP

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace torsionlab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Malformed input or a violated structural invariant (d∘d ≠ 0, non-exact
/// sequence, bad group table, shape mismatch). The CLI maps this to exit 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation that could not be completed to the requested accuracy
/// (quadrature non-convergence, singular input to an invertibility-based
/// check). The CLI maps this to exit 1.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical thresholds shared by every module.
///
/// `rank` overrides the per-matrix default rank tolerance
/// ‖A‖₂ · max(rows, cols) · 2⁻⁴⁰; singular values and eigenvalues at or
/// below it count as zero. `validation` is the relative threshold for
/// d∘d = 0, the chain rule and exactness checks.
struct Tolerances {
    std::optional<double> rank;
    double validation = 1e-10;

    /// Rank tolerance for a matrix whose largest singular value is `norm2`.
    [[nodiscard]] double rank_for(double norm2, Eigen::Index rows, Eigen::Index cols) const;

    /// Whether ‖a∘b‖ = `defect` counts as zero: below validation × ‖a‖‖b‖, or
    /// at the roundoff floor 64 ε max(‖a‖, ‖b‖)² (which matters when one
    /// factor is itself roundoff noise).
    [[nodiscard]] bool negligible(double defect, double norm_a, double norm_b) const;
};

}  // namespace torsionlab

#endif
