#ifndef TORSIONLAB_LUECK_HPP
#define TORSIONLAB_LUECK_HPP

// ℓ²(Z)-operators as matrices of Laurent polynomials in t, their
// specializations to the finite quotients Z/m, and the limit m → ∞.
//
// A Laurent entry Σ c_k t^k acts on ℓ²(Z/m) as Σ c_k R^k with R the
// regular action of the generator, the same convention as group_ring_matrix
// for FiniteGroup::cyclic(m). On the character e^{2πiθ} it becomes the symbol
// Σ c_k e^{2πikθ}; the symbol matrix collects these entrywise.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "torsionlab/twisted_cw.hpp"

namespace torsionlab {

class LaurentPoly {
public:
    LaurentPoly() = default;
    LaurentPoly(Complex constant);  // NOLINT(google-explicit-constructor)
    static LaurentPoly monomial(long exponent, Complex coeff = 1.0);

    /// Parses sums and products of numbers, "i", "t", "t^k" and
    /// parentheses, e.g. "2 - t - t^-1" or "(1 - t)(1 - t^-1)". A negative
    /// power is only allowed on a monomial.
    static LaurentPoly parse(std::string_view text);

    /// Coefficients with |c| ≤ 0 are not stored.
    [[nodiscard]] const std::map<long, Complex>& terms() const { return terms_; }
    [[nodiscard]] bool is_zero() const { return terms_.empty(); }
    [[nodiscard]] Complex coeff(long exponent) const;
    [[nodiscard]] LaurentPoly adjoint() const;
    [[nodiscard]] Complex evaluate(Complex z) const;
    /// Σ |c_k|.
    [[nodiscard]] double coefficient_l1() const;
    [[nodiscard]] bool has_integer_coefficients(double tol = 0.0) const;
    [[nodiscard]] long min_exponent() const;
    [[nodiscard]] long max_exponent() const;
    [[nodiscard]] std::string to_string() const;

    LaurentPoly& operator+=(const LaurentPoly& other);
    friend LaurentPoly operator+(LaurentPoly a, const LaurentPoly& b) { return a += b; }
    friend LaurentPoly operator-(const LaurentPoly& a, const LaurentPoly& b);
    friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b);
    friend bool operator==(const LaurentPoly& a, const LaurentPoly& b) { return a.terms_ == b.terms_; }

private:
    void add_term(long exponent, Complex coeff);
    std::map<long, Complex> terms_;
};

class LaurentMatrix {
public:
    LaurentMatrix() = default;
    LaurentMatrix(int rows, int cols);
    static LaurentMatrix identity(int n);
    static LaurentMatrix scalar(const LaurentPoly& p) {
        LaurentMatrix m(1, 1);
        m(0, 0) = p;
        return m;
    }

    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] int cols() const { return cols_; }
    LaurentPoly& operator()(int r, int c) { return entries_[static_cast<std::size_t>(r * cols_ + c)]; }
    [[nodiscard]] const LaurentPoly& operator()(int r, int c) const {
        return entries_[static_cast<std::size_t>(r * cols_ + c)];
    }

    [[nodiscard]] LaurentMatrix adjoint() const;
    [[nodiscard]] bool is_selfadjoint(double tol = 1e-12) const;
    [[nodiscard]] bool has_integer_coefficients(double tol = 0.0) const;
    /// Matrix of values at z = e^{2πiθ}.
    [[nodiscard]] Matrix symbol(double theta) const;
    /// max over rows of Σ_entries Σ|coeff|: bounds the norm of every
    /// specialization and of the ℓ²(Z) operator.
    [[nodiscard]] double gershgorin_bound() const;

    friend LaurentMatrix operator*(const LaurentMatrix& a, const LaurentMatrix& b);
    friend LaurentMatrix operator+(const LaurentMatrix& a, const LaurentMatrix& b);
    friend bool operator==(const LaurentMatrix& a, const LaurentMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<LaurentPoly> entries_;
};

/// Laurent form of the coboundaries of a cell complex with IntegerLaurent
/// coefficients (fiber 1): δ_q as a (#(q+1)-cells × #q-cells) matrix.
[[nodiscard]] LaurentMatrix laurent_coboundary(const TwistedCellComplex& cw, int degree);

/// Δ_q = δ_q*δ_q + δ_{q−1}δ_{q−1}* in Laurent form.
[[nodiscard]] LaurentMatrix laurent_laplacian(const TwistedCellComplex& cw, int degree);

/// Block matrix over ℓ²(Z/m) ⊗ C^n; each entry becomes Σ c_k R^k.
[[nodiscard]] Morphism specialize(const LaurentMatrix& op, int m);

/// Eigenvalues of the specialization at level m, through the symbol at the
/// m-th roots of unity (block diagonalization by characters). Ascending.
[[nodiscard]] RealVector level_eigenvalues(const LaurentMatrix& op, int m);

struct LevelData {
    int m = 0;
    SpectralDistribution distribution;  // N_m, normalized by 1/m; total = n
    double log_det = 0.0;               // (1/m) Σ log μ over μ > rank tol
    double log_det_by_parts = 0.0;      // (log b)(N(b) − N(0)) − ∫_a^b (N(λ) − N(0))/λ dλ
    double smallest_nonzero = 0.0;      // a_m (0 if there is none)
    double largest = 0.0;               // b_m
    double kernel = 0.0;                // N_m(0)
};

/// Eigenvalues below −rank tol raise ValidationError ("not nonnegative").
[[nodiscard]] LevelData level_data(const LaurentMatrix& op, int m, const Tolerances& tol = {});

/// (1/m) log det' of the specialization; checks that the eigenvalue sum and
/// the integration-by-parts form agree to 1e−9.
[[nodiscard]] double level_log_det(const LaurentMatrix& op, int m, const Tolerances& tol = {});

struct ApproxTower {
    LaurentMatrix op;
    std::vector<int> levels;
    double b = 0.0;  // Gershgorin bound, ≥ every b_m and ‖op‖
    std::vector<LevelData> data;  // sorted by m
};

/// 2, 4, …, 2^12.
[[nodiscard]] std::vector<int> default_levels();

/// Parses "2..4096" (powers of two between the bounds), "8" or a comma list
/// "2,6,12".
[[nodiscard]] std::vector<int> parse_levels(std::string_view text);

/// Number of worker threads: hardware concurrency, capped by the
/// TORSIONLAB_THREADS environment variable when set.
[[nodiscard]] unsigned worker_threads();

/// Checks selfadjointness and nesting (each level divides the next), then
/// computes every level, concurrently when worker_threads() > 1.
[[nodiscard]] ApproxTower build_tower(const LaurentMatrix& op, std::vector<int> levels,
                                      const Tolerances& tol = {});

struct QuadratureConfig {
    double tolerance = 1e-8;     // absolute, on the global error estimate
    int max_subdivisions = 4000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

/// ∫₀¹ Σ log(positive eigenvalues of symbol(θ)) dθ by globally adaptive
/// Gauss–Kronrod bisection. Raises NumericalError with the bracket
/// [value − error, value + error] if the error estimate stays above the
/// tolerance.
[[nodiscard]] QuadratureResult fourier_log_det_detailed(const LaurentMatrix& op,
                                                        const QuadratureConfig& config = {});
[[nodiscard]] double fourier_log_det(const LaurentMatrix& op, const QuadratureConfig& config = {});

/// N(λ) = ∫₀¹ #{eigenvalues of symbol(θ) ≤ λ} dθ, located by a grid scan
/// plus bisection on each ordered eigenvalue branch.
[[nodiscard]] double limit_distribution(const LaurentMatrix& op, double lambda, int grid = 4096);

struct LimitRow {
    double epsilon = 0.0;
    std::vector<double> level_values;  // N_m(λ + ε), in tower order
    double liminf = 0.0;               // minimum over the tail (upper half) of the tower
};

struct LimitReport {
    double lambda = 0.0;
    double oracle = 0.0;  // N(λ)
    double kernel_limit = 0.0;  // N(0) from the oracle
    std::vector<LimitRow> rows;
    std::vector<std::string> anomalies;  // e.g. liminf decreasing as ε grows
};

[[nodiscard]] LimitReport limit_distribution_check(const ApproxTower& tower, double lambda,
                                                   const std::vector<double>& epsilons);

struct SemicontinuityReport {
    double oracle_log_det = 0.0;           // fourier_log_det
    double liminf_log_det = 0.0;           // min over the tail of the tower
    double oracle_integral = 0.0;          // ∫₀^b (N(λ) − N(0))/λ dλ
    std::vector<double> level_integrals;   // same for N_m
    bool log_det_bound = false;            // oracle ≤ liminf + tol
    bool integral_bound = false;           // oracle integral ≤ liminf of level integrals, see below
};

/// The level integrals equal (log b)(N_m(b) − N_m(0)) − level log det, and
/// the oracle integral equals (log b)(n − N(0)) − oracle log det. The
/// integral bound holds if every tail level reaches the oracle within tol,
/// or the deficits shrink strictly along the tail and the last one is at
/// most half the first.
[[nodiscard]] SemicontinuityReport semicontinuity_check(const ApproxTower& tower,
                                                        double tol = 1e-6,
                                                        const QuadratureConfig& config = {});

struct NonnegativityReport {
    bool passed = true;
    std::vector<std::string> violations;  // name the offending level
    std::vector<double> det_prime;        // exp(m · level log det), per level
    std::vector<double> integer_residual; // |det' − round(det')|, NaN when det' > 2^20
    int integrality_checked = 0;
    double fourier = 0.0;
};

/// Requires integer coefficients. Every level needs det' ≥ 1 (log det' ≥
/// −tol), det' within 1e−6 of an integer where det' ≤ 2^20, and the Fourier
/// value ≥ −tol.
[[nodiscard]] NonnegativityReport nonnegativity_check(const ApproxTower& tower, double tol = 1e-6,
                                                      const QuadratureConfig& config = {});

}  // namespace torsionlab

#endif
