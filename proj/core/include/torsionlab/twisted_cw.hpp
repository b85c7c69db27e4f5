#ifndef TORSIONLAB_TWISTED_CW_HPP
#define TORSIONLAB_TWISTED_CW_HPP

// Cochain complexes of twisted cells. Each q-cell carries one copy of the
// fiber module; the coboundary from a q-cell x to a (q+1)-cell y is a
// group-ring word evaluated in the representation.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "torsionlab/exact_seq.hpp"

namespace torsionlab {

/// coeff · element^power. The element "e" is the identity.
struct WordTerm {
    std::string element = "e";
    long power = 1;
    Complex coeff{1.0, 0.0};
};
using IncidenceWord = std::vector<WordTerm>;

/// Coboundary word from the q-cell `from` to the (q+1)-cell `to`.
struct Incidence {
    std::string from;
    std::string to;
    IncidenceWord word;
};

enum class CoefficientKind {
    FiniteGroup,     // regular representation of context.group(), tensored with C^fiber
    Unitary,         // explicit unitary fiber×fiber matrices over C, one per generator
    IntegerLaurent,  // Γ = Z with generator "t"; evaluated by the lueck module
};

class TwistedCellComplex {
public:
    TraceContext context = TraceContext::complex_field();
    CoefficientKind kind = CoefficientKind::Unitary;
    int fiber_dim = 1;
    int top_degree = 0;
    std::vector<std::vector<std::string>> cells;      // cells[q], in basis order
    std::vector<Incidence> incidences;
    std::map<std::string, Matrix> representation;    // Unitary kind only

    /// Checks labels, degrees of incidences, representation shapes and
    /// unitarity (1e−10). Does not check δ∘δ (build_complex does).
    void validate() const;

    [[nodiscard]] int max_degree() const { return static_cast<int>(cells.size()) - 1; }
    [[nodiscard]] std::size_t cell_count(int degree) const;
    /// (degree, position) of a cell label.
    [[nodiscard]] std::pair<int, int> locate(const std::string& label) const;
    [[nodiscard]] std::vector<std::string> all_labels() const;
};

/// Matrix (fiber ambient) of one word under the complex's coefficients.
[[nodiscard]] Matrix evaluate_word(const TwistedCellComplex& cw, const IncidenceWord& word);

/// Word with conjugated coefficients, inverted elements: the adjoint.
[[nodiscard]] IncidenceWord adjoint_word(const IncidenceWord& word);

/// C^q = ⊕_{q-cells} fiber module; δ∘δ = 0 checked with the offending cell pair
/// named in the error.
[[nodiscard]] CochainComplex build_complex(const TwistedCellComplex& cw, const Tolerances& tol = {});

struct TcombReport {
    double via_laplacians = 0.0;  // ½ Σ (−1)^{q+1} q log det' Δ_q
    double via_hodge = 0.0;       // Σ (−1)^j log Vol(underline δ_j)
    double euler_characteristic = 0.0;
    [[nodiscard]] double value() const { return via_laplacians; }
};

[[nodiscard]] TcombReport t_comb_report(const TwistedCellComplex& cw, const Tolerances& tol = {});
[[nodiscard]] double t_comb(const TwistedCellComplex& cw, const Tolerances& tol = {});

/// Cells of degree q become cells of degree d − q; the word from dual(y) to
/// dual(x) is (−1)^{q(d−q)} times the adjoint of the word from x to y.
[[nodiscard]] TwistedCellComplex dual_complex(const TwistedCellComplex& cw);

struct DualityReport {
    int top_degree = 0;
    double t_comb = 0.0;
    double t_comb_dual = 0.0;
    double torsion_residual = 0.0;  // |T − (−1)^{d+1} T_D|
    double intertwining_residual = 0.0;  // max_q ‖δ_q − s_q (δ^D_{d−q−1})*‖
};

[[nodiscard]] DualityReport duality_check(const TwistedCellComplex& cw, const Tolerances& tol = {});

struct GluingSpec {
    TwistedCellComplex lower;  // M₁: quotient
    TwistedCellComplex upper;  // M₂: subcomplex
    std::vector<Incidence> coupling;  // lower q-cell → upper (q+1)-cell
};

struct GluedComplex {
    TwistedCellComplex glued;  // cells of each degree: upper first, then lower
    CochainComplex complex;
    ComplexSES ses;            // 0 → C(M₂) → C(M) → C(M₁) → 0
};

[[nodiscard]] GluedComplex glue(const GluingSpec& spec, const Tolerances& tol = {});

struct GlueReport {
    double t_comb_glued = 0.0;
    double t_comb_lower = 0.0;
    double t_comb_upper = 0.0;
    double t_long = 0.0;  // log T(ℋ_comb)
    double residual = 0.0;
    MilnorReport milnor;
};

/// T_comb(M) = T_comb(M₁) + T_comb(M₂) + log T(ℋ_comb).
[[nodiscard]] GlueReport glue_check(const GluingSpec& spec, const Tolerances& tol = {});

/// Cellwise tensor product of the two built complexes; one factor must have
/// complex-field coefficients.
[[nodiscard]] CochainComplex product_complex(const TwistedCellComplex& first,
                                             const TwistedCellComplex& second,
                                             const Tolerances& tol = {});

/// Disjoint union (same coefficients and fiber).
[[nodiscard]] TwistedCellComplex disjoint_union(const TwistedCellComplex& a,
                                                const TwistedCellComplex& b);

/// Flip the orientation of cells: every word touching a cell with sign −1 is
/// negated once per such endpoint.
[[nodiscard]] TwistedCellComplex reorient(const TwistedCellComplex& cw,
                                          const std::map<std::string, int>& signs);

namespace builtin {

[[nodiscard]] TwistedCellComplex point();
/// (I, {a}, {b}) with h(x) = x: no cells.
[[nodiscard]] TwistedCellComplex interval_tau1();
/// (I, ∅, ∂I) with a single minimum: one 0-cell.
[[nodiscard]] TwistedCellComplex interval_tau2();
/// One 0-cell x, one 1-cell y, δ(x) = (t − e)y with t ↦ λ (|λ| = 1).
[[nodiscard]] TwistedCellComplex circle(Complex holonomy);
/// Same cells over ℓ²(Z/m) with the regular representation.
[[nodiscard]] TwistedCellComplex circle_cyclic(int order);
/// Same cells over Z (Laurent coefficients), for the lueck module.
[[nodiscard]] TwistedCellComplex circle_integers();
/// lower: one 0-cell x, upper: one 1-cell y, coupling x → y with word e − t.
[[nodiscard]] GluingSpec circle_from_two_arcs(Complex holonomy);

[[nodiscard]] std::vector<std::string> names();
/// Looks up "point", "interval_tau1", "interval_tau2", "circle", "circle_cyclic".
/// `parameter` is the holonomy angle in units of π for circle, the order
/// for circle_cyclic.
[[nodiscard]] TwistedCellComplex by_name(const std::string& name, double parameter = 1.0);

}  // namespace builtin

}  // namespace torsionlab

#endif
