#include "torsionlab/complexes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace torsionlab {

namespace {

HilbertModule zero_module(const TraceContext& context) { return HilbertModule::free(context, 0); }

double sign_of_degree(int degree) { return (degree % 2 == 0) ? 1.0 : -1.0; }

/// Ranked singular subspaces of one differential.
struct SingularParts {
    Matrix left;   // orthonormal basis of closure of Range(d)
    Matrix right;  // orthonormal basis of closure of Range(d*)
    bool ambiguous = false;
};

SingularParts singular_parts(const Matrix& d, const Tolerances& tol) {
    SingularParts parts;
    if (d.size() == 0) {
        parts.left = Matrix(d.rows(), 0);
        parts.right = Matrix(d.cols(), 0);
        return parts;
    }
    Eigen::JacobiSVD<Matrix> svd(d, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    const double cutoff = tol.rank_for(s(0), d.rows(), d.cols());
    const Eigen::Index r = (s.array() > cutoff).count();
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cutoff / 10.0 && s(i) <= cutoff * 10.0 && s(i) > 0.0) parts.ambiguous = true;
    parts.left = svd.matrixU().leftCols(r);
    parts.right = svd.matrixV().leftCols(r);
    return parts;
}

/// Rotate each column so its first significant entry is real positive.
void fix_phases(Matrix& basis) {
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        const double scale = basis.col(c).cwiseAbs().maxCoeff();
        for (Eigen::Index r = 0; r < basis.rows(); ++r) {
            const Complex v = basis(r, c);
            if (std::abs(v) > 1e-8 * scale) {
                basis.col(c) *= std::conj(v) / std::abs(v);
                break;
            }
        }
    }
}

Matrix orthogonal_complement(const Matrix& spanning, Eigen::Index ambient) {
    const Eigen::Index k = spanning.cols();
    if (k == 0) return Matrix::Identity(ambient, ambient);
    if (k >= ambient) return Matrix(ambient, 0);
    const Matrix projector = spanning * spanning.adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(projector);
    Matrix basis = eig.eigenvectors().leftCols(ambient - k);
    fix_phases(basis);
    return basis;
}

void require_same_range(const CochainComplex& a, const CochainComplex& b, const char* what) {
    if (a.start_degree() != b.start_degree() || a.length() != b.length()) {
        std::ostringstream out;
        out << what << ": complexes cover degrees [" << a.start_degree() << ", " << a.end_degree()
            << "] and [" << b.start_degree() << ", " << b.end_degree()
            << "]; pad them to a common range";
        throw ValidationError(out.str());
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// CochainComplex

CochainComplex::CochainComplex(TraceContext context, int start_degree)
    : context_(std::move(context)), start_(start_degree) {}

CochainComplex::CochainComplex(std::vector<HilbertModule> modules,
                               std::vector<Morphism> differentials, int start_degree,
                               const Tolerances& tol)
    : start_(start_degree), modules_(std::move(modules)), differentials_(std::move(differentials)) {
    if (modules_.empty()) {
        if (!differentials_.empty()) throw ValidationError("differentials without modules");
        return;
    }
    context_ = modules_.front().context();
    const std::size_t expected = modules_.size() - 1;
    if (differentials_.size() != expected) {
        std::ostringstream out;
        out << "complex with " << modules_.size() << " modules needs " << expected
            << " differentials, got " << differentials_.size();
        throw ValidationError(out.str());
    }
    for (const auto& m : modules_)
        if (!(m.context() == context_))
            throw ValidationError("complex modules live over different trace contexts");
    for (std::size_t i = 0; i < differentials_.size(); ++i) {
        const Morphism& d = differentials_[i];
        if (d.matrix().cols() != modules_[i].ambient_dim() ||
            d.matrix().rows() != modules_[i + 1].ambient_dim()) {
            std::ostringstream out;
            out << "differential d_" << start_ + static_cast<int>(i) << " is " << d.matrix().rows()
                << "x" << d.matrix().cols() << ", expected " << modules_[i + 1].ambient_dim()
                << "x" << modules_[i].ambient_dim();
            throw ValidationError(out.str());
        }
        differentials_[i] = Morphism(modules_[i], modules_[i + 1], d.matrix());
    }
    for (std::size_t i = 0; i + 1 < differentials_.size(); ++i) {
        const Matrix& a = differentials_[i].matrix();
        const Matrix& b = differentials_[i + 1].matrix();
        const double defect = (b * a).norm();
        if (!tol.negligible(defect, a.norm(), b.norm())) {
            std::ostringstream out;
            out << "d_" << start_ + static_cast<int>(i) + 1 << " o d_" << start_ + static_cast<int>(i)
                << " != 0 (norm " << defect << ")";
            throw ValidationError(out.str());
        }
    }
}

CochainComplex CochainComplex::concentrated(const HilbertModule& module, int degree) {
    return CochainComplex({module}, {}, degree);
}

HilbertModule CochainComplex::module(int degree) const {
    if (degree < start_ || degree > end_degree()) return zero_module(context_);
    return modules_[static_cast<std::size_t>(degree - start_)];
}

Morphism CochainComplex::differential(int degree) const {
    if (degree >= start_ && degree < end_degree())
        return differentials_[static_cast<std::size_t>(degree - start_)];
    return Morphism::zero(module(degree), module(degree + 1));
}

double CochainComplex::euler_characteristic() const {
    double chi = 0.0;
    for (int q = start_; q <= end_degree(); ++q) chi += sign_of_degree(q) * module(q).vn_dim();
    return chi;
}

CochainComplex CochainComplex::padded(int lo, int hi) const {
    if (!empty() && (lo > start_ || hi < end_degree()))
        throw ValidationError("padding range must contain the complex");
    std::vector<HilbertModule> mods;
    std::vector<Morphism> diffs;
    for (int q = lo; q <= hi; ++q) {
        mods.push_back(module(q));
        if (q < hi) diffs.push_back(differential(q));
    }
    CochainComplex out(std::move(mods), std::move(diffs), lo);
    out.context_ = context_;
    return out;
}

CochainComplex CochainComplex::conjugated(const std::vector<Matrix>& bases) const {
    if (static_cast<int>(bases.size()) != length())
        throw ValidationError("one change of basis per degree is required");
    std::vector<Matrix> inverses;
    for (std::size_t i = 0; i < bases.size(); ++i) {
        if (bases[i].rows() != modules_[i].ambient_dim() || bases[i].cols() != bases[i].rows())
            throw ValidationError("change of basis has the wrong shape");
        Eigen::FullPivLU<Matrix> lu(bases[i]);
        if (!lu.isInvertible()) throw ValidationError("change of basis is singular");
        inverses.push_back(lu.inverse());
    }
    std::vector<Morphism> diffs;
    for (std::size_t i = 0; i < differentials_.size(); ++i)
        diffs.emplace_back(modules_[i], modules_[i + 1],
                           bases[i + 1] * differentials_[i].matrix() * inverses[i]);
    Tolerances loose;
    loose.validation = 1e-8;
    return CochainComplex(modules_, std::move(diffs), start_, loose);
}

// ---------------------------------------------------------------------------
// Hodge decomposition and torsion

const HodgeDegree& HodgeData::at(int degree) const {
    const int k = degree - start_degree;
    if (k < 0 || k >= static_cast<int>(degrees.size()))
        throw ValidationError("degree " + std::to_string(degree) + " outside the complex");
    return degrees[static_cast<std::size_t>(k)];
}

double HodgeData::betti(int degree, const TraceContext& context) const {
    const int k = degree - start_degree;
    if (k < 0 || k >= static_cast<int>(degrees.size())) return 0.0;
    return context.kappa() * static_cast<double>(degrees[static_cast<std::size_t>(k)].harmonic.cols());
}

HodgeData hodge(const CochainComplex& complex, const Tolerances& tol) {
    HodgeData data;
    data.start_degree = complex.start_degree();
    const TraceContext& ctx = complex.context();
    std::vector<SingularParts> parts;
    for (int q = complex.start_degree(); q < complex.end_degree(); ++q) {
        parts.push_back(singular_parts(complex.differential(q).matrix(), tol));
        data.rank_ambiguous = data.rank_ambiguous || parts.back().ambiguous;
    }
    for (int k = 0; k < complex.length(); ++k) {
        const int q = complex.start_degree() + k;
        const Eigen::Index n = complex.module(q).ambient_dim();
        HodgeDegree hd;
        hd.degree = q;
        hd.plus = k > 0 ? parts[static_cast<std::size_t>(k - 1)].left : Matrix(n, 0);
        hd.minus = k + 1 < complex.length() ? parts[static_cast<std::size_t>(k)].right : Matrix(n, 0);
        if (hd.plus.cols() + hd.minus.cols() > n)
            throw ValidationError("rank of d_" + std::to_string(q - 1) + " plus rank of d_" +
                                  std::to_string(q) + " exceeds dim C_" + std::to_string(q) +
                                  "; the complex is not exact to tolerance");
        Matrix spanning(n, hd.plus.cols() + hd.minus.cols());
        spanning << hd.plus, hd.minus;
        hd.harmonic = orthogonal_complement(spanning, n);
        data.degrees.push_back(std::move(hd));
    }
    for (int k = 0; k + 1 < complex.length(); ++k) {
        const int q = complex.start_degree() + k;
        const Matrix& minus = data.degrees[static_cast<std::size_t>(k)].minus;
        const Matrix& plus = data.degrees[static_cast<std::size_t>(k + 1)].plus;
        Matrix reduced = plus.adjoint() * complex.differential(q).matrix() * minus;
        data.reduced.emplace_back(HilbertModule::subspace(ctx, minus.cols()),
                                  HilbertModule::subspace(ctx, plus.cols()), std::move(reduced));
    }
    return data;
}

double torsion(const HodgeData& hodge_data, const Tolerances& tol) {
    double sum = 0.0;
    for (std::size_t k = 0; k < hodge_data.reduced.size(); ++k) {
        const int q = hodge_data.start_degree + static_cast<int>(k);
        sum += sign_of_degree(q) * log_vol(hodge_data.reduced[k], tol);
    }
    return sum;
}

double torsion(const CochainComplex& complex, const Tolerances& tol) {
    return torsion(hodge(complex, tol), tol);
}

Morphism laplacian(const CochainComplex& complex, int degree) {
    if (degree < complex.start_degree() || degree > complex.end_degree())
        throw ValidationError("laplacian degree " + std::to_string(degree) + " out of range [" +
                              std::to_string(complex.start_degree()) + ", " +
                              std::to_string(complex.end_degree()) + "]");
    const Morphism out = complex.differential(degree);
    const Morphism in = complex.differential(degree - 1);
    const HilbertModule m = complex.module(degree);
    return Morphism(m, m, out.matrix().adjoint() * out.matrix() + in.matrix() * in.matrix().adjoint());
}

double log_det_prime(const Morphism& op, const Tolerances& tol) {
    if (!op.is_endomorphism()) throw ValidationError("log det' of a non-square morphism");
    const Matrix& a = op.matrix();
    if (a.size() == 0) return 0.0;
    const double scale = std::max(1.0, a.norm());
    if ((a - a.adjoint()).norm() > 1e-10 * scale)
        throw ValidationError("log det' requires a selfadjoint operator");
    const RealVector ev = hermitian_eigenvalues(a);
    const double top = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    const double cutoff = tol.rank_for(top, a.rows(), a.cols());
    if (ev(0) < -std::max(cutoff, 1e-12 * top))
        throw ValidationError("log det' requires a nonnegative operator (eigenvalue " +
                              std::to_string(ev(0)) + ")");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > cutoff) sum += std::log(ev(i));
    return op.context().kappa() * sum;
}

double torsion_via_laplacians(const CochainComplex& complex, const Tolerances& tol) {
    double sum = 0.0;
    for (int q = complex.start_degree(); q <= complex.end_degree(); ++q) {
        if (q == 0) continue;
        sum += 0.5 * sign_of_degree(q + 1) * q * log_det_prime(laplacian(complex, q), tol);
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Constructions

CochainComplex tensor_product(const CochainComplex& first, const CochainComplex& second,
                              const Tolerances& tol) {
    const TraceContext ctx = combined_context(first.context(), second.context());
    if (first.empty() || second.empty())
        return CochainComplex(ctx, first.start_degree() + second.start_degree());
    for (const auto* c : {&first, &second})
        for (const auto& m : c->modules())
            if (!m.has_free_layout())
                throw ValidationError("tensor product needs free module layouts");

    const int s1 = first.start_degree(), e1 = first.end_degree();
    const int s2 = second.start_degree(), e2 = second.end_degree();
    const int lo = s1 + s2, hi = e1 + e2;

    auto dim1 = [&](int k) { return first.module(k).ambient_dim(); };
    auto dim2 = [&](int l) { return second.module(l).ambient_dim(); };
    // Offset of summand C¹_k ⊗ C²_{j−k} inside C_j.
    auto offset = [&](int j, int k) {
        Eigen::Index off = 0;
        for (int kk = std::max(s1, j - e2); kk < k; ++kk) off += dim1(kk) * dim2(j - kk);
        return off;
    };
    auto total = [&](int j) { return offset(j, std::min(e1, j - s2) + 1); };

    std::vector<HilbertModule> mods;
    for (int j = lo; j <= hi; ++j) {
        const Eigen::Index rank = total(j) / ctx.group_order();
        mods.push_back(HilbertModule::free(ctx, rank));
    }
    std::vector<Morphism> diffs;
    for (int j = lo; j < hi; ++j) {
        Matrix d = Matrix::Zero(total(j + 1), total(j));
        for (int k = std::max(s1, j - e2); k <= std::min(e1, j - s2); ++k) {
            const int l = j - k;
            const Eigen::Index col = offset(j, k);
            const Eigen::Index w = dim1(k) * dim2(l);
            if (k + 1 <= e1) {
                const Matrix block =
                    layout_kron(first.differential(k).matrix(), first.context(),
                                Matrix::Identity(dim2(l), dim2(l)), second.context());
                d.block(offset(j + 1, k + 1), col, block.rows(), w) += block;
            }
            if (l + 1 <= e2) {
                const Matrix block =
                    sign_of_degree(k) * layout_kron(Matrix::Identity(dim1(k), dim1(k)),
                                                    first.context(),
                                                    second.differential(l).matrix(),
                                                    second.context());
                d.block(offset(j + 1, k), col, block.rows(), w) += block;
            }
        }
        const std::size_t idx = static_cast<std::size_t>(j - lo);
        diffs.emplace_back(mods[idx], mods[idx + 1], std::move(d));
    }
    return CochainComplex(std::move(mods), std::move(diffs), lo, tol);
}

CochainComplex suspension(const CochainComplex& complex) {
    if (complex.empty()) return CochainComplex(complex.context(), complex.start_degree() - 1);
    std::vector<Morphism> diffs;
    for (const auto& d : complex.differentials()) diffs.push_back(d.scaled(-1.0));
    return CochainComplex(complex.modules(), std::move(diffs), complex.start_degree() - 1);
}

// ---------------------------------------------------------------------------
// Morphisms of complexes

ComplexMorphism::ComplexMorphism(CochainComplex source, CochainComplex target,
                                 std::vector<Morphism> components, const Tolerances& tol)
    : source_(std::move(source)), target_(std::move(target)), components_(std::move(components)) {
    require_same_range(source_, target_, "complex morphism");
    if (!(source_.context() == target_.context()))
        throw ValidationError("complex morphism between different trace contexts");
    if (static_cast<int>(components_.size()) != source_.length())
        throw ValidationError("complex morphism needs one component per degree");
    for (int k = 0; k < source_.length(); ++k) {
        const int q = source_.start_degree() + k;
        Morphism& f = components_[static_cast<std::size_t>(k)];
        f = Morphism(source_.module(q), target_.module(q), f.matrix());
    }
    for (int k = 0; k + 1 < source_.length(); ++k) {
        const int q = source_.start_degree() + k;
        const Matrix& fq = components_[static_cast<std::size_t>(k)].matrix();
        const Matrix& fq1 = components_[static_cast<std::size_t>(k + 1)].matrix();
        const Matrix ds = source_.differential(q).matrix();
        const Matrix dt = target_.differential(q).matrix();
        const double defect = (dt * fq - fq1 * ds).norm();
        const bool first = dt.norm() * fq.norm() >= fq1.norm() * ds.norm();
        if (!(first ? tol.negligible(defect, dt.norm(), fq.norm())
                    : tol.negligible(defect, fq1.norm(), ds.norm())))
            throw ValidationError("chain rule d f = f d fails in degree " + std::to_string(q) +
                                  " (defect " + std::to_string(defect) + ")");
    }
}

ComplexMorphism ComplexMorphism::identity(const CochainComplex& complex) {
    std::vector<Morphism> comps;
    for (const auto& m : complex.modules()) comps.push_back(Morphism::identity(m));
    return ComplexMorphism(complex, complex, std::move(comps));
}

const Morphism& ComplexMorphism::component(int degree) const {
    const int k = degree - start_degree();
    if (k < 0 || k >= static_cast<int>(components_.size()))
        throw ValidationError("degree " + std::to_string(degree) + " outside the morphism");
    return components_[static_cast<std::size_t>(k)];
}

MappingCone mapping_cone(const ComplexMorphism& f, const Tolerances& tol) {
    const CochainComplex& c1 = f.source();
    const CochainComplex& c2 = f.target();
    const int lo = c1.start_degree() - 1;
    const int hi = c1.end_degree();

    auto f_at = [&](int q) -> Matrix {
        if (q < f.start_degree() || q > f.end_degree())
            return Matrix::Zero(c2.module(q).ambient_dim(), c1.module(q).ambient_dim());
        return f.component(q).matrix();
    };

    std::vector<HilbertModule> cone_mods;
    for (int q = lo; q <= hi; ++q) cone_mods.push_back(c2.module(q).direct_sum(c1.module(q + 1)));
    std::vector<Morphism> cone_diffs;
    for (int q = lo; q < hi; ++q) {
        const Eigen::Index a2 = c2.module(q).ambient_dim(), b1 = c1.module(q + 1).ambient_dim();
        const Eigen::Index a2n = c2.module(q + 1).ambient_dim(),
                           b1n = c1.module(q + 2).ambient_dim();
        Matrix d = Matrix::Zero(a2n + b1n, a2 + b1);
        d.topLeftCorner(a2n, a2) = c2.differential(q).matrix();
        d.topRightCorner(a2n, b1) = f_at(q + 1);
        d.bottomRightCorner(b1n, b1) = -c1.differential(q + 1).matrix();
        const std::size_t k = static_cast<std::size_t>(q - lo);
        cone_diffs.emplace_back(cone_mods[k], cone_mods[k + 1], std::move(d));
    }
    CochainComplex cone(cone_mods, std::move(cone_diffs), lo, tol);
    CochainComplex target = c2.padded(lo, hi);
    CochainComplex suspended = suspension(c1).padded(lo, hi);

    std::vector<Morphism> incl, proj;
    for (int q = lo; q <= hi; ++q) {
        const Eigen::Index a2 = c2.module(q).ambient_dim(), b1 = c1.module(q + 1).ambient_dim();
        Matrix j = Matrix::Zero(a2 + b1, a2);
        j.topRows(a2).setIdentity();
        Matrix p = Matrix::Zero(b1, a2 + b1);
        p.rightCols(b1).setIdentity();
        incl.emplace_back(target.module(q), cone.module(q), std::move(j));
        proj.emplace_back(cone.module(q), suspended.module(q), std::move(p));
    }
    ComplexMorphism inclusion(target, cone, std::move(incl), tol);
    ComplexMorphism projection(cone, suspended, std::move(proj), tol);
    return MappingCone{std::move(cone), std::move(suspended), std::move(inclusion),
                       std::move(projection)};
}

Morphism induced_harmonic_map(const ComplexMorphism& f, int degree, const HodgeData& source_hodge,
                              const HodgeData& target_hodge, const Tolerances& tol) {
    const Matrix& hs = source_hodge.at(degree).harmonic;
    const Matrix& ht = target_hodge.at(degree).harmonic;
    const TraceContext& ctx = f.source().context();
    const Matrix& fq = f.component(degree).matrix();
    const double threshold = tol.rank_for(operator_norm(fq), fq.rows(), fq.cols());
    return Morphism(HilbertModule::subspace(ctx, hs.cols()), HilbertModule::subspace(ctx, ht.cols()),
                    truncate_singular_values(ht.adjoint() * fq * hs, threshold));
}

Morphism induced_harmonic_map(const ComplexMorphism& f, int degree, const Tolerances& tol) {
    return induced_harmonic_map(f, degree, hodge(f.source(), tol), hodge(f.target(), tol), tol);
}

double torsion_transfer_residual(const ComplexMorphism& f, const Tolerances& tol) {
    const HodgeData h1 = hodge(f.source(), tol);
    const HodgeData h2 = hodge(f.target(), tol);
    double vol_sum = 0.0, harmonic_sum = 0.0;
    for (int q = f.start_degree(); q <= f.end_degree(); ++q) {
        const Morphism& fq = f.component(q);
        if (!fq.is_endomorphism() || numerical_rank(fq.matrix(), tol) != fq.matrix().rows())
            throw ValidationError("component f_" + std::to_string(q) + " is not invertible");
        vol_sum += sign_of_degree(q) * log_vol(fq, tol);
        harmonic_sum += sign_of_degree(q) * log_vol(induced_harmonic_map(f, q, h1, h2, tol), tol);
    }
    return std::abs(torsion(h2, tol) - torsion(h1, tol) + vol_sum - harmonic_sum);
}

}  // namespace torsionlab
