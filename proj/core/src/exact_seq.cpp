#include "torsionlab/exact_seq.hpp"

#include <cmath>
#include <sstream>

namespace torsionlab {

namespace {

double sign_of_degree(int degree) { return (degree % 2 == 0) ? 1.0 : -1.0; }

Matrix least_squares(const Matrix& a, const Matrix& rhs, const Tolerances& tol) {
    if (a.cols() == 0) return Matrix::Zero(0, rhs.cols());
    if (a.rows() == 0) return Matrix::Zero(a.cols(), rhs.cols());
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& s = svd.singularValues();
    svd.setThreshold(tol.rank_for(s(0), a.rows(), a.cols()) / std::max(s(0), 1e-300));
    return svd.solve(rhs);
}

/// Solve g x = h with x restricted to coordinate directions completing an
/// orthonormal basis of Null(g) (a non-orthogonal complement in general).
Matrix complement_lift(const Matrix& g, const Matrix& h, const Tolerances& tol) {
    const Eigen::Index n = g.cols();
    if (n == 0 || h.cols() == 0) return Matrix::Zero(n, h.cols());
    Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    const double cutoff = s.size() ? tol.rank_for(s(0), g.rows(), g.cols()) : 0.0;
    const Eigen::Index r = (s.array() > cutoff).count();
    const Matrix kernel = svd.matrixV().rightCols(n - r);
    // Greedy pick of standard basis vectors independent of the kernel.
    std::vector<Eigen::Index> chosen;
    Matrix basis = kernel;
    for (Eigen::Index j = 0; j < n && static_cast<Eigen::Index>(chosen.size()) < r; ++j) {
        Matrix trial(n, basis.cols() + 1);
        trial << basis, Matrix::Identity(n, n).col(j);
        if (numerical_rank(trial) == trial.cols()) {
            basis = trial;
            chosen.push_back(j);
        }
    }
    Matrix restricted(g.rows(), static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t k = 0; k < chosen.size(); ++k)
        restricted.col(static_cast<Eigen::Index>(k)) = g.col(chosen[k]);
    const Matrix coeffs = restricted.fullPivLu().solve(h);
    Matrix x = Matrix::Zero(n, h.cols());
    for (std::size_t k = 0; k < chosen.size(); ++k) x.row(chosen[k]) = coeffs.row(static_cast<Eigen::Index>(k));
    return x;
}

/// 1 / smallest nonzero singular value.
double pseudo_inverse_norm(const Matrix& a, const Tolerances& tol) {
    if (a.size() == 0) return 0.0;
    const RealVector s = singular_values(a);
    const double cutoff = tol.rank_for(s(0), a.rows(), a.cols());
    double smallest = 0.0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) > cutoff) smallest = s(k);
    return smallest > 0.0 ? 1.0 / smallest : 0.0;
}

}  // namespace

ComplexSES::ComplexSES(ComplexMorphism f, ComplexMorphism g, const Tolerances& tol)
    : f_(std::move(f)), g_(std::move(g)) {
    if (f_.start_degree() != g_.start_degree() || f_.end_degree() != g_.end_degree())
        throw ValidationError("short exact sequence maps cover different degree ranges");
    const CochainComplex& middle = f_.target();
    const CochainComplex& middle_g = g_.source();
    for (int q = f_.start_degree(); q <= f_.end_degree(); ++q) {
        if (middle.module(q).ambient_dim() != middle_g.module(q).ambient_dim())
            throw ValidationError("f and g disagree on the middle complex in degree " +
                                  std::to_string(q));
        const Matrix& fq = f_.component(q).matrix();
        const Matrix& gq = g_.component(q).matrix();
        const double comp = (gq * fq).norm();
        if (!tol.negligible(comp, gq.norm(), fq.norm()))
            throw ValidationError("g o f != 0 in degree " + std::to_string(q));
        const Eigen::Index rf = numerical_rank(fq, tol), rg = numerical_rank(gq, tol);
        std::ostringstream where;
        where << " in degree " << q;
        if (rf != fq.cols()) throw ValidationError("f is not injective" + where.str());
        if (rg != gq.rows()) throw ValidationError("g is not surjective" + where.str());
        if (rf + rg != fq.rows()) throw ValidationError("Null(g) != Range(f)" + where.str());
    }
}

Morphism connecting_hom(const ComplexSES& ses, int degree, const Tolerances& tol,
                        LiftStrategy lift) {
    const HodgeData h1 = hodge(ses.sub(), tol);
    const HodgeData h3 = hodge(ses.quotient(), tol);
    const TraceContext& ctx = ses.sub().context();
    const Matrix& harmonic3 = h3.at(degree).harmonic;
    const bool has_next = degree + 1 <= ses.end_degree();
    const Matrix harmonic1_next =
        has_next ? h1.at(degree + 1).harmonic
                 : Matrix(ses.sub().module(degree + 1).ambient_dim(), 0);
    const HilbertModule dom = HilbertModule::subspace(ctx, harmonic3.cols());
    const HilbertModule cod = HilbertModule::subspace(ctx, harmonic1_next.cols());
    if (!has_next || harmonic3.cols() == 0 || harmonic1_next.cols() == 0)
        return Morphism::zero(dom, cod);

    const Matrix& gq = ses.g().component(degree).matrix();
    const Matrix u = lift == LiftStrategy::PseudoInverse ? least_squares(gq, harmonic3, tol)
                                                         : complement_lift(gq, harmonic3, tol);
    const Matrix v = ses.total().differential(degree).matrix() * u;
    const Matrix& fnext = ses.f().component(degree + 1).matrix();
    const Matrix w = least_squares(fnext, v, tol);
    const double residual = (fnext * w - v).norm();
    if (residual > 1e-8 * std::max(1.0, v.norm()))
        throw ValidationError("connecting map: d u does not lie in Range(f) (residual " +
                              std::to_string(residual) + ")");
    // Roundoff in the zig-zag scales with ‖d‖ ‖g⁺‖ ‖f⁺‖.
    const Matrix d = ses.total().differential(degree).matrix();
    const double scale = operator_norm(d) * pseudo_inverse_norm(gq, tol) *
                         pseudo_inverse_norm(fnext, tol);
    const double threshold = tol.rank_for(scale, std::max(d.rows(), gq.rows()),
                                          std::max(d.cols(), fnext.cols()));
    return Morphism(dom, cod, truncate_singular_values(harmonic1_next.adjoint() * w, threshold));
}

LongSequence long_sequence(const ComplexSES& ses, const Tolerances& tol) {
    LongSequence seq;
    seq.start_degree = ses.start_degree();
    const HodgeData h1 = hodge(ses.sub(), tol);
    const HodgeData h2 = hodge(ses.total(), tol);
    const HodgeData h3 = hodge(ses.quotient(), tol);
    const TraceContext& ctx = ses.sub().context();

    std::vector<HilbertModule> mods;
    std::vector<Morphism> diffs;
    for (int i = ses.start_degree(); i <= ses.end_degree(); ++i) {
        seq.hf.push_back(induced_harmonic_map(ses.f(), i, h1, h2, tol));
        seq.hg.push_back(induced_harmonic_map(ses.g(), i, h2, h3, tol));
        seq.delta.push_back(connecting_hom(ses, i, tol));
        mods.push_back(seq.hf.back().domain());
        mods.push_back(seq.hf.back().codomain());
        mods.push_back(seq.hg.back().codomain());
        diffs.push_back(seq.hf.back());
        diffs.push_back(seq.hg.back());
        if (i < ses.end_degree()) diffs.push_back(seq.delta.back());
    }
    for (std::size_t k = 0; k < diffs.size(); ++k)
        diffs[k] = Morphism(mods[k], mods[k + 1], diffs[k].matrix());
    if (mods.empty()) {
        seq.complex = CochainComplex(ctx, 3 * ses.start_degree());
        return seq;
    }
    Tolerances loose = tol;
    loose.validation = std::max(tol.validation, 1e-8);
    seq.complex = CochainComplex(std::move(mods), std::move(diffs), 3 * ses.start_degree(), loose);

    // Exactness at every stage: rank(in) + rank(out) = dim.
    const CochainComplex& c = seq.complex;
    for (int q = c.start_degree(); q <= c.end_degree(); ++q) {
        const Eigen::Index in = numerical_rank(c.differential(q - 1).matrix(), tol);
        const Eigen::Index out = numerical_rank(c.differential(q).matrix(), tol);
        if (in + out != c.module(q).ambient_dim())
            throw ValidationError("long cohomology sequence is not exact at position " +
                                  std::to_string(q));
    }
    return seq;
}

double three_stage_torsion(const CochainComplex& complex, const Tolerances& tol) {
    if (complex.length() != 3)
        throw ValidationError("three-stage torsion needs exactly three modules, got " +
                              std::to_string(complex.length()));
    const HodgeData h = hodge(complex, tol);
    return log_vol(h.reduced[0], tol) - log_vol(h.reduced[1], tol);
}

double degreewise_torsion(const ComplexSES& ses, int degree, const Tolerances& tol) {
    const Morphism& fq = ses.f().component(degree);
    const Morphism& gq = ses.g().component(degree);
    Tolerances loose = tol;
    loose.validation = std::max(tol.validation, 1e-8);
    const CochainComplex stage({fq.domain(), fq.codomain(), gq.codomain()}, {fq, gq}, 0, loose);
    return three_stage_torsion(stage, tol);
}

MilnorReport milnor_check(const ComplexSES& ses, const Tolerances& tol) {
    MilnorReport report;
    report.start_degree = ses.start_degree();
    report.torsion_sub = torsion(ses.sub(), tol);
    report.torsion_total = torsion(ses.total(), tol);
    report.torsion_quotient = torsion(ses.quotient(), tol);
    report.torsion_long = torsion(long_sequence(ses, tol).complex, tol);
    double alternating = 0.0;
    for (int q = ses.start_degree(); q <= ses.end_degree(); ++q) {
        report.degreewise.push_back(degreewise_torsion(ses, q, tol));
        alternating += sign_of_degree(q) * report.degreewise.back();
    }
    report.lhs = report.torsion_total;
    report.rhs = report.torsion_sub + report.torsion_quotient + report.torsion_long - alternating;
    report.residual = std::abs(report.lhs - report.rhs);
    return report;
}

ComplexSES cone_sequence(const MappingCone& cone, const Tolerances& tol) {
    return ComplexSES(cone.inclusion, cone.projection, tol);
}

}  // namespace torsionlab
