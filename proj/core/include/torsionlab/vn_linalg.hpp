#ifndef TORSIONLAB_VN_LINALG_HPP
#define TORSIONLAB_VN_LINALG_HPP

// Finite-dimensional Hilbert modules over a finite trace algebra (the complex
// numbers, or the group algebra of a finite group with trace 1/|Γ| · Tr), the
// morphisms between them, and their Fuglede–Kadison volumes.
//
// Layout convention for modules over a finite group Γ: a free module of rank r
// is ℓ²(Γ) ⊗ Cʳ with basis index  block · |Γ| + g  (block-major, group-minor).
// The group algebra acts on morphisms by right multiplication; A-linear maps
// are exactly those commuting with the left translations I_r ⊗ L_h.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "torsionlab/types.hpp"

namespace torsionlab {

class FiniteGroup {
public:
    /// Validates closure, associativity, identity and inverses.
    FiniteGroup(std::vector<std::string> labels, std::vector<std::vector<int>> table);

    /// Z/n with elements "e", "t", "t^2", ….
    static FiniteGroup cyclic(int order);

    /// S_n on {0,…,n−1}; elements labelled by one-line notation "s012",
    /// identity "e". Composition (a·b)(k) = a(b(k)).
    static FiniteGroup symmetric(int n);

    [[nodiscard]] int order() const { return static_cast<int>(labels_.size()); }
    [[nodiscard]] int identity() const { return identity_; }
    [[nodiscard]] int multiply(int a, int b) const { return table_[a][b]; }
    [[nodiscard]] int inverse(int a) const { return inverse_[a]; }
    [[nodiscard]] int power(int a, long exponent) const;
    /// Accepts a label, or "x^k" for a label x and integer k.
    [[nodiscard]] int index_of(std::string_view label) const;
    [[nodiscard]] const std::string& label(int a) const { return labels_[a]; }
    [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
    [[nodiscard]] const std::vector<std::vector<int>>& table() const { return table_; }

    bool operator==(const FiniteGroup& other) const {
        return labels_ == other.labels_ && table_ == other.table_;
    }

private:
    std::vector<std::string> labels_;
    std::vector<std::vector<int>> table_;
    std::vector<int> inverse_;
    int identity_ = 0;
};

/// The finite von Neumann algebra a computation lives over, with its trace
/// normalization kappa (1 for C, 1/|Γ| for a finite group).
class TraceContext {
public:
    static TraceContext complex_field() { return TraceContext{}; }
    static TraceContext finite_group(FiniteGroup group);

    [[nodiscard]] bool is_complex_field() const { return group_ == nullptr; }
    [[nodiscard]] const FiniteGroup& group() const;
    [[nodiscard]] int group_order() const { return group_ ? group_->order() : 1; }
    [[nodiscard]] double kappa() const { return 1.0 / group_order(); }
    [[nodiscard]] std::string describe() const;

    bool operator==(const TraceContext& other) const;

private:
    std::shared_ptr<const FiniteGroup> group_;
};

class HilbertModule {
public:
    HilbertModule() = default;

    /// Free module ℓ²(Γ) ⊗ Cʳ; ambient dimension r·|Γ|.
    static HilbertModule free(const TraceContext& context, Eigen::Index rank);

    /// Coordinates with respect to an orthonormal basis of an invariant
    /// subspace of some free module. Its von Neumann dimension is still
    /// kappa × ambient_dim, but the ambient space carries no block layout.
    static HilbertModule subspace(const TraceContext& context, Eigen::Index ambient_dim);

    [[nodiscard]] const TraceContext& context() const { return context_; }
    [[nodiscard]] Eigen::Index ambient_dim() const { return ambient_; }
    [[nodiscard]] double vn_dim() const { return context_.kappa() * static_cast<double>(ambient_); }
    [[nodiscard]] bool has_free_layout() const { return free_; }
    [[nodiscard]] Eigen::Index free_rank() const;

    /// Orthogonal direct sum; free iff both summands are.
    [[nodiscard]] HilbertModule direct_sum(const HilbertModule& other) const;

private:
    HilbertModule(TraceContext context, Eigen::Index ambient, bool free)
        : context_(std::move(context)), ambient_(ambient), free_(free) {}

    TraceContext context_;
    Eigen::Index ambient_ = 0;
    bool free_ = true;
};

class Morphism {
public:
    Morphism() = default;
    Morphism(HilbertModule domain, HilbertModule codomain, Matrix matrix);

    static Morphism identity(const HilbertModule& module);
    static Morphism zero(const HilbertModule& domain, const HilbertModule& codomain);

    [[nodiscard]] const HilbertModule& domain() const { return domain_; }
    [[nodiscard]] const HilbertModule& codomain() const { return codomain_; }
    [[nodiscard]] const Matrix& matrix() const { return matrix_; }
    [[nodiscard]] const TraceContext& context() const { return domain_.context(); }
    [[nodiscard]] bool is_endomorphism() const { return matrix_.rows() == matrix_.cols(); }

    [[nodiscard]] Morphism adjoint() const;
    [[nodiscard]] Morphism scaled(Complex factor) const;

    /// g ∘ f.
    friend Morphism operator*(const Morphism& g, const Morphism& f);
    friend Morphism operator+(const Morphism& a, const Morphism& b);

private:
    HilbertModule domain_;
    HilbertModule codomain_;
    Matrix matrix_;
};

/// Right-continuous nondecreasing step function F(λ) = kappa × #{μ ≤ λ} over
/// a finite multiset of nonnegative reals μ (squared singular values or
/// eigenvalues).
struct SpectralDistribution {
    struct Jump {
        double lambda;
        double value;  // F(lambda), i.e. cumulative including this jump
    };

    std::vector<Jump> jumps;  // strictly increasing lambda
    double total = 0.0;

    /// Groups values closer than `merge_tol` into one jump; values ≤
    /// `zero_tol` are placed at λ = 0.
    static SpectralDistribution from_values(std::vector<double> values, double kappa,
                                            double zero_tol);

    [[nodiscard]] double operator()(double lambda) const;

    /// ∫_{0+}^∞ ½ log λ dF(λ): log Vol when F is the distribution of f*f.
    [[nodiscard]] double half_log_integral() const;

    /// ∫_{0+}^∞ log λ dF(λ): log det' when F is the distribution of a
    /// nonnegative operator.
    [[nodiscard]] double log_integral() const { return 2.0 * half_log_integral(); }
};

struct PolarDecomposition {
    Morphism isometry;  // partial isometry, zero on Null(f)
    Morphism positive;  // (f*f)^{1/2}
};

/// Largest-first singular values (two-sided Jacobi SVD).
[[nodiscard]] RealVector singular_values(const Matrix& matrix);

/// Ascending eigenvalues of a Hermitian matrix.
[[nodiscard]] RealVector hermitian_eigenvalues(const Matrix& matrix);

[[nodiscard]] double operator_norm(const Matrix& matrix);

[[nodiscard]] double default_rank_tol(const Matrix& matrix, const Tolerances& tol = {});

[[nodiscard]] Eigen::Index numerical_rank(const Matrix& matrix, const Tolerances& tol = {});

/// Drops singular values ≤ threshold. Used for maps derived from a larger
/// operator, whose roundoff floor is set by that operator and not by the
/// derived map itself.
[[nodiscard]] Matrix truncate_singular_values(const Matrix& matrix, double threshold);

/// kappa × ordinary trace.
[[nodiscard]] Complex vn_trace(const Morphism& op);

[[nodiscard]] PolarDecomposition polar_decompose(const Morphism& f, const Tolerances& tol = {});

/// F_f(λ) = kappa × #{singular values σ of f with σ² ≤ λ}; total dim_N(domain).
[[nodiscard]] SpectralDistribution spectral_distribution(const Morphism& f,
                                                         const Tolerances& tol = {});

/// kappa × Σ log σ over singular values above the rank tolerance; 0 for the
/// zero morphism. This is log Vol of the weak isomorphism f' induced between
/// the coimage and the closure of the range.
[[nodiscard]] double log_vol(const Morphism& f, const Tolerances& tol = {});

/// Always true for finite matrices: the Stieltjes integral of log λ over
/// (0, 1] against F_f is a finite sum.
[[nodiscard]] bool is_determinant_class(const Morphism& f, const Tolerances& tol = {});

/// |log Vol(g∘f) − log Vol(g) − log Vol(f)| for invertible composable f, g.
[[nodiscard]] double log_vol_additivity_residual(const Morphism& f, const Morphism& g,
                                                 const Tolerances& tol = {});

/// Builds [[f, h], [0, g]] and returns |log Vol(block) − log Vol(f) − log Vol(g)|.
/// f: W₁ → W₁', g: W₂ → W₂' invertible, h: W₂ → W₁'.
[[nodiscard]] double block_triangular_log_vol_residual(const Morphism& f, const Morphism& g,
                                                       const Morphism& h,
                                                       const Tolerances& tol = {});

[[nodiscard]] Morphism block_upper_triangular(const Morphism& f, const Morphism& g,
                                              const Morphism& h);

/// One term c·g of a group-ring element.
struct GroupTerm {
    std::string element;
    Complex coeff{1.0, 0.0};
};
using GroupWord = std::vector<GroupTerm>;

/// Σ coeff × (right-regular permutation of g), acting on ℓ²(Γ) ⊗ C^fiber.
[[nodiscard]] Morphism group_ring_matrix(const GroupWord& word, const TraceContext& context,
                                         int fiber_dim);

/// Dense ℓ²(Γ) matrix of Σ c·R_g given group indices.
[[nodiscard]] Matrix regular_representation(const FiniteGroup& group,
                                            const std::vector<std::pair<int, Complex>>& terms);

/// I_rank ⊗ L_h on a free module.
[[nodiscard]] Matrix left_translation(const FiniteGroup& group, Eigen::Index rank, int element);

/// max_h ‖M (I ⊗ L_h) − (I ⊗ L_h) M‖_F; 0 for the complex field. Requires
/// free layouts on both ends.
[[nodiscard]] double a_linearity_defect(const Morphism& f);

/// Kronecker product with the factor over the group context placed minor,
/// so the result keeps the block-major, group-minor layout. At most one of
/// the two contexts may be a finite group.
[[nodiscard]] Matrix layout_kron(const Matrix& a, const TraceContext& a_context, const Matrix& b,
                                 const TraceContext& b_context);

[[nodiscard]] TraceContext combined_context(const TraceContext& a, const TraceContext& b);

}  // namespace torsionlab

#endif
