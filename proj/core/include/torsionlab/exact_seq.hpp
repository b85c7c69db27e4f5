#ifndef TORSIONLAB_EXACT_SEQ_HPP
#define TORSIONLAB_EXACT_SEQ_HPP

#include <vector>

#include "torsionlab/complexes.hpp"

namespace torsionlab {

/// 0 → C¹ --f--> C² --g--> C³ → 0, exact in every degree.
class ComplexSES {
public:
    /// Checks per degree: f_i injective, g_i surjective, g_i f_i = 0 and
    /// rank f_i + rank g_i = dim C²_i.
    ComplexSES(ComplexMorphism f, ComplexMorphism g, const Tolerances& tol = {});

    [[nodiscard]] const ComplexMorphism& f() const { return f_; }
    [[nodiscard]] const ComplexMorphism& g() const { return g_; }
    [[nodiscard]] const CochainComplex& sub() const { return f_.source(); }
    [[nodiscard]] const CochainComplex& total() const { return f_.target(); }
    [[nodiscard]] const CochainComplex& quotient() const { return g_.target(); }
    [[nodiscard]] int start_degree() const { return f_.start_degree(); }
    [[nodiscard]] int end_degree() const { return f_.end_degree(); }

private:
    ComplexMorphism f_;
    ComplexMorphism g_;
};

enum class LiftStrategy {
    PseudoInverse,    // minimal-norm preimage
    ComplementBasis,  // preimage inside a coordinate complement of Null(g_i)
};

/// H(δ_i): ℋ_i(C³) → ℋ_{i+1}(C¹) in the harmonic bases of hodge(), by the
/// zig-zag lift / differentiate / pull back / project.
[[nodiscard]] Morphism connecting_hom(const ComplexSES& ses, int degree, const Tolerances& tol = {},
                                      LiftStrategy lift = LiftStrategy::PseudoInverse);

/// The cohomology sequence viewed as a cochain complex, graded by
/// H^i(C¹) ↦ 3i, H^i(C²) ↦ 3i+1, H^i(C³) ↦ 3i+2.
struct LongSequence {
    CochainComplex complex;
    std::vector<Morphism> hf;     // H(f_i)
    std::vector<Morphism> hg;     // H(g_i)
    std::vector<Morphism> delta;  // H(δ_i)
    int start_degree = 0;         // i of the first entries above
};

[[nodiscard]] LongSequence long_sequence(const ComplexSES& ses, const Tolerances& tol = {});

/// log Vol(underline d_0) − log Vol(underline d_1) of a complex with exactly
/// three modules (relative indexing; torsion() differs by (−1)^start).
[[nodiscard]] double three_stage_torsion(const CochainComplex& complex, const Tolerances& tol = {});

/// Torsion of 0 → C¹_i → C²_i → C³_i → 0.
[[nodiscard]] double degreewise_torsion(const ComplexSES& ses, int degree,
                                        const Tolerances& tol = {});

struct MilnorReport {
    double torsion_sub = 0.0;       // log T(C¹)
    double torsion_total = 0.0;     // log T(C²)
    double torsion_quotient = 0.0;  // log T(C³)
    double torsion_long = 0.0;      // log T(ℋ)
    std::vector<double> degreewise;  // log T(0 → C¹_i → C²_i → C³_i → 0)
    int start_degree = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
};

/// log T(C²) = log T(C¹) + log T(C³) + log T(ℋ) − Σ_i (−1)^i log T(C_i-sequence).
[[nodiscard]] MilnorReport milnor_check(const ComplexSES& ses, const Tolerances& tol = {});

/// The SES 0 → C² → C(f) → SC¹ → 0 of a mapping cone.
[[nodiscard]] ComplexSES cone_sequence(const MappingCone& cone, const Tolerances& tol = {});

}  // namespace torsionlab

#endif
