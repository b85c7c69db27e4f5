#ifndef TORSIONLAB_COMPLEXES_HPP
#define TORSIONLAB_COMPLEXES_HPP

#include <vector>

#include "torsionlab/vn_linalg.hpp"

namespace torsionlab {

/// Finite cochain complex 0 → C_s → C_{s+1} → … → C_e → 0 of Hilbert modules
/// over one trace context. Degrees outside [s, e] hold the zero module.
class CochainComplex {
public:
    /// Empty (zero) complex.
    explicit CochainComplex(TraceContext context = TraceContext::complex_field(),
                            int start_degree = 0);

    /// Validates shapes, contexts, and d_{i+1} ∘ d_i = 0 within
    /// tol.validation × ‖d_{i+1}‖_F ‖d_i‖_F.
    CochainComplex(std::vector<HilbertModule> modules, std::vector<Morphism> differentials,
                   int start_degree = 0, const Tolerances& tol = {});

    static CochainComplex concentrated(const HilbertModule& module, int degree);

    [[nodiscard]] const TraceContext& context() const { return context_; }
    [[nodiscard]] int start_degree() const { return start_; }
    [[nodiscard]] int end_degree() const { return start_ + static_cast<int>(modules_.size()) - 1; }
    [[nodiscard]] int length() const { return static_cast<int>(modules_.size()); }
    [[nodiscard]] bool empty() const { return modules_.empty(); }

    [[nodiscard]] HilbertModule module(int degree) const;
    /// d_degree : C_degree → C_{degree+1}.
    [[nodiscard]] Morphism differential(int degree) const;

    [[nodiscard]] const std::vector<HilbertModule>& modules() const { return modules_; }
    [[nodiscard]] const std::vector<Morphism>& differentials() const { return differentials_; }

    /// Σ (−1)^q dim_N C_q.
    [[nodiscard]] double euler_characteristic() const;

    /// Same complex viewed over degrees [lo, hi] ⊇ [start, end], zero-padded.
    [[nodiscard]] CochainComplex padded(int lo, int hi) const;

    /// Degreewise change of basis d_i ↦ P_{i+1} d_i P_i⁻¹.
    [[nodiscard]] CochainComplex conjugated(const std::vector<Matrix>& bases) const;

private:
    TraceContext context_;
    int start_ = 0;
    std::vector<HilbertModule> modules_;
    std::vector<Morphism> differentials_;  // size max(0, length-1)
};

/// Orthonormal bases of C_i = ℋ_i ⊕ C_i⁺ ⊕ C_i⁻ (columns of ambient matrices).
struct HodgeDegree {
    int degree = 0;
    Matrix harmonic;  // Null(d_i) ∩ Null(d_{i−1}*)
    Matrix plus;      // closure of Range(d_{i−1})
    Matrix minus;     // closure of Range(d_i*)
};

struct HodgeData {
    int start_degree = 0;
    std::vector<HodgeDegree> degrees;
    /// reduced[k] is d_{start+k} restricted to C⁻ → C⁺ in the bases above.
    std::vector<Morphism> reduced;
    /// A singular value lies within a factor 10 of the rank tolerance.
    bool rank_ambiguous = false;

    [[nodiscard]] const HodgeDegree& at(int degree) const;
    /// dim_N ℋ_degree (the L²-Betti number); 0 outside the range.
    [[nodiscard]] double betti(int degree, const TraceContext& context) const;
};

[[nodiscard]] HodgeData hodge(const CochainComplex& complex, const Tolerances& tol = {});

/// Σ_j (−1)^j log Vol(underline d_j) from the Hodge decomposition.
[[nodiscard]] double torsion(const CochainComplex& complex, const Tolerances& tol = {});
[[nodiscard]] double torsion(const HodgeData& hodge_data, const Tolerances& tol = {});

/// Δ_q = d_q* d_q + d_{q−1} d_{q−1}*.
[[nodiscard]] Morphism laplacian(const CochainComplex& complex, int degree);

/// kappa × Σ log λ over eigenvalues above the rank tolerance of a
/// selfadjoint nonnegative endomorphism; 0 for the zero operator.
[[nodiscard]] double log_det_prime(const Morphism& op, const Tolerances& tol = {});

/// ½ Σ_q (−1)^{q+1} q log det' Δ_q, computed from Laplacian spectra only.
[[nodiscard]] double torsion_via_laplacians(const CochainComplex& complex,
                                            const Tolerances& tol = {});

/// C_j = ⊕_k C¹_k ⊗ C²_{j−k},  d(x ⊗ y) = d¹x ⊗ y + (−1)^{deg x} x ⊗ d²y.
/// At most one factor may live over a finite group.
[[nodiscard]] CochainComplex tensor_product(const CochainComplex& first,
                                            const CochainComplex& second,
                                            const Tolerances& tol = {});

/// (SC)_i = C_{i+1}, (Sd)_i = −d_{i+1}.
[[nodiscard]] CochainComplex suspension(const CochainComplex& complex);

/// Family f_i : C¹_i → C²_i with d² f = f d¹. Source and target must cover
/// the same degree range (use CochainComplex::padded).
class ComplexMorphism {
public:
    ComplexMorphism(CochainComplex source, CochainComplex target,
                    std::vector<Morphism> components, const Tolerances& tol = {});

    static ComplexMorphism identity(const CochainComplex& complex);

    [[nodiscard]] const CochainComplex& source() const { return source_; }
    [[nodiscard]] const CochainComplex& target() const { return target_; }
    [[nodiscard]] const Morphism& component(int degree) const;
    [[nodiscard]] const std::vector<Morphism>& components() const { return components_; }
    [[nodiscard]] int start_degree() const { return source_.start_degree(); }
    [[nodiscard]] int end_degree() const { return source_.end_degree(); }

private:
    CochainComplex source_;
    CochainComplex target_;
    std::vector<Morphism> components_;
};

struct MappingCone {
    CochainComplex cone;         // C_i(f) = C²_i ⊕ C¹_{i+1}
    CochainComplex suspended;    // S C¹
    ComplexMorphism inclusion;   // j(f): C² → C(f)
    ComplexMorphism projection;  // p(f): C(f) → S C¹
};

/// d_i(f) = [[d²_i, f_{i+1}], [0, −d¹_{i+1}]]. All four complexes are padded
/// to the common range [start − 1, end].
[[nodiscard]] MappingCone mapping_cone(const ComplexMorphism& f, const Tolerances& tol = {});

/// H(f_i) = (harmonic projection of the target) ∘ f_i ∘ (harmonic inclusion
/// of the source), in the harmonic bases of hodge(). Singular values below
/// the rank tolerance of f_i itself are dropped.
[[nodiscard]] Morphism induced_harmonic_map(const ComplexMorphism& f, int degree,
                                            const Tolerances& tol = {});
[[nodiscard]] Morphism induced_harmonic_map(const ComplexMorphism& f, int degree,
                                            const HodgeData& source_hodge,
                                            const HodgeData& target_hodge,
                                            const Tolerances& tol = {});

/// |T(C²) − T(C¹) + Σ(−1)^i log Vol f_i − Σ(−1)^i log Vol H(f_i)| for a
/// degreewise invertible f.
[[nodiscard]] double torsion_transfer_residual(const ComplexMorphism& f,
                                               const Tolerances& tol = {});

}  // namespace torsionlab

#endif
