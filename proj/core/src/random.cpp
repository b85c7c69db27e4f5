#include "torsionlab/random.hpp"

#include <cmath>

namespace torsionlab {

namespace {

Matrix harmonic_projector(const HodgeData& h, int degree, Eigen::Index ambient) {
    if (degree < h.start_degree ||
        degree >= h.start_degree + static_cast<int>(h.degrees.size()))
        return Matrix::Zero(ambient, ambient);
    const Matrix& basis = h.at(degree).harmonic;
    return basis * basis.adjoint();
}

Matrix singular_block(const TraceContext& context, RandomSource& rng) {
    if (context.is_complex_field()) return Matrix::Zero(1, 1);
    const FiniteGroup& group = context.group();
    if (group.order() == 1) return Matrix::Zero(1, 1);
    int element = group.identity();
    while (element == group.identity()) element = rng.uniform_int(0, group.order() - 1);
    const Complex c = rng.complex_normal();
    return regular_representation(group, {{group.identity(), c}, {element, -c}});
}

}  // namespace

Matrix random_group_ring_block(const TraceContext& context, RandomSource& rng) {
    if (context.is_complex_field()) return Matrix::Constant(1, 1, rng.complex_normal());
    const FiniteGroup& group = context.group();
    std::vector<std::pair<int, Complex>> terms;
    for (int g = 0; g < group.order(); ++g) terms.emplace_back(g, rng.complex_normal());
    return regular_representation(group, terms);
}

Matrix random_a_linear(const TraceContext& context, Eigen::Index rows, Eigen::Index cols,
                       RandomSource& rng) {
    const Eigen::Index n = context.group_order();
    Matrix out = Matrix::Zero(rows * n, cols * n);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            out.block(i * n, j * n, n, n) = random_group_ring_block(context, rng);
    return out;
}

Matrix random_a_linear_invertible(const TraceContext& context, Eigen::Index rank,
                                  RandomSource& rng) {
    const Eigen::Index ambient = rank * context.group_order();
    Matrix out = random_a_linear(context, rank, rank, rng);
    out += Matrix::Identity(ambient, ambient) * (4.0 * std::sqrt(static_cast<double>(ambient)));
    return out;
}

CochainComplex random_complex(const TraceContext& context, const RandomComplexShape& shape,
                              RandomSource& rng) {
    if (shape.length <= 0) return CochainComplex(context, shape.start_degree);
    const int len = shape.length;
    const Eigen::Index n = context.group_order();

    // rank[q] counts free summands of C_q.
    std::vector<Eigen::Index> rank(static_cast<std::size_t>(len), 0);
    struct Piece {
        int degree;  // source degree (relative)
        Eigen::Index source_slot;
        Eigen::Index target_slot;
        Matrix block;
    };
    std::vector<Piece> pieces;
    for (int q = 0; q < len; ++q) rank[static_cast<std::size_t>(q)] += rng.uniform_int(0, shape.max_harmonic);
    for (int q = 0; q + 1 < len; ++q) {
        const int count = rng.uniform_int(0, shape.max_pairs);
        for (int k = 0; k < count; ++k) {
            Piece p;
            p.degree = q;
            p.source_slot = rank[static_cast<std::size_t>(q)]++;
            p.target_slot = rank[static_cast<std::size_t>(q + 1)]++;
            const bool singular = shape.allow_singular && rng.uniform(0.0, 1.0) < 0.2;
            p.block = singular ? singular_block(context, rng) : random_group_ring_block(context, rng);
            pieces.push_back(std::move(p));
        }
    }

    std::vector<HilbertModule> modules;
    for (int q = 0; q < len; ++q)
        modules.push_back(HilbertModule::free(context, rank[static_cast<std::size_t>(q)]));
    std::vector<Matrix> diffs;
    for (int q = 0; q + 1 < len; ++q)
        diffs.push_back(Matrix::Zero(rank[static_cast<std::size_t>(q + 1)] * n,
                                     rank[static_cast<std::size_t>(q)] * n));
    for (const Piece& p : pieces)
        diffs[static_cast<std::size_t>(p.degree)].block(p.target_slot * n, p.source_slot * n, n, n) =
            p.block;

    std::vector<Morphism> morphisms;
    for (int q = 0; q + 1 < len; ++q)
        morphisms.emplace_back(modules[static_cast<std::size_t>(q)],
                               modules[static_cast<std::size_t>(q + 1)],
                               diffs[static_cast<std::size_t>(q)]);
    CochainComplex complex(std::move(modules), std::move(morphisms), shape.start_degree);
    if (!shape.conjugate) return complex;
    std::vector<Matrix> bases;
    for (int q = 0; q < len; ++q)
        bases.push_back(random_a_linear_invertible(context, rank[static_cast<std::size_t>(q)], rng));
    return complex.conjugated(bases);
}

ComplexSES random_ses(const CochainComplex& sub, const CochainComplex& quotient,
                      RandomSource& rng, const RandomSesOptions& options) {
    if (!(sub.context() == quotient.context()))
        throw ValidationError("random_ses: contexts differ");
    const TraceContext& context = sub.context();
    const int lo = std::min(sub.start_degree(), quotient.start_degree());
    const int hi = std::max(sub.end_degree(), quotient.end_degree());
    const CochainComplex c1 = sub.padded(lo, hi);
    const CochainComplex c3 = quotient.padded(lo, hi);
    const Eigen::Index n = context.group_order();
    auto free_rank = [&](const HilbertModule& m) { return m.ambient_dim() / n; };

    const HodgeData h1 = hodge(c1);
    const HodgeData h3 = hodge(c3);

    std::vector<Matrix> u;
    for (int q = lo; q <= hi + 1; ++q)
        u.push_back(!options.coboundary_twist ? Matrix::Zero(c1.module(q).ambient_dim(), c3.module(q).ambient_dim())
                          : random_a_linear(context, free_rank(c1.module(q)),
                                            free_rank(c3.module(q)), rng));

    std::vector<HilbertModule> mods;
    for (int q = lo; q <= hi; ++q) mods.push_back(c1.module(q).direct_sum(c3.module(q)));
    std::vector<Morphism> diffs;
    for (int q = lo; q < hi; ++q) {
        const std::size_t k = static_cast<std::size_t>(q - lo);
        const Matrix d1 = c1.differential(q).matrix();
        const Matrix d3 = c3.differential(q).matrix();
        Matrix theta = d1 * u[k] - u[k + 1] * d3;
        if (options.harmonic_twist) {
            const Matrix y = random_a_linear(context, free_rank(c1.module(q + 1)),
                                             free_rank(c3.module(q)), rng);
            theta += harmonic_projector(h1, q + 1, c1.module(q + 1).ambient_dim()) * y *
                     harmonic_projector(h3, q, c3.module(q).ambient_dim());
        }
        const Eigen::Index a1 = d1.cols(), a3 = d3.cols(), b1 = d1.rows(), b3 = d3.rows();
        Matrix d = Matrix::Zero(b1 + b3, a1 + a3);
        d.topLeftCorner(b1, a1) = d1;
        d.topRightCorner(b1, a3) = theta;
        d.bottomRightCorner(b3, a3) = d3;
        diffs.emplace_back(mods[k], mods[k + 1], d);
    }
    Tolerances loose;
    loose.validation = 1e-8;
    const CochainComplex c2(mods, diffs, lo, loose);

    std::vector<Matrix> bases;
    for (int q = lo; q <= hi; ++q)
        bases.push_back(!options.change_basis ? Matrix::Identity(mods[static_cast<std::size_t>(q - lo)].ambient_dim(),
                                                 mods[static_cast<std::size_t>(q - lo)].ambient_dim())
                              : random_a_linear_invertible(
                                    context, free_rank(mods[static_cast<std::size_t>(q - lo)]), rng));
    const CochainComplex c2t = c2.conjugated(bases);

    std::vector<Morphism> fs, gs;
    for (int q = lo; q <= hi; ++q) {
        const std::size_t k = static_cast<std::size_t>(q - lo);
        const Eigen::Index a1 = c1.module(q).ambient_dim(), a3 = c3.module(q).ambient_dim();
        Matrix inc = Matrix::Zero(a1 + a3, a1);
        inc.topRows(a1) = Matrix::Identity(a1, a1);
        Matrix proj = Matrix::Zero(a3, a1 + a3);
        proj.rightCols(a3) = Matrix::Identity(a3, a3);
        fs.emplace_back(c1.module(q), c2t.module(q), bases[k] * inc);
        gs.emplace_back(c2t.module(q), c3.module(q), proj * bases[k].fullPivLu().inverse());
    }
    ComplexMorphism f(c1, c2t, fs, loose);
    ComplexMorphism g(c2t, c3, gs, loose);
    return ComplexSES(std::move(f), std::move(g));
}

ComplexMorphism random_chain_map(const CochainComplex& source, const CochainComplex& target,
                                 RandomSource& rng) {
    if (source.start_degree() != target.start_degree() ||
        source.end_degree() != target.end_degree())
        throw ValidationError("random_chain_map: degree ranges differ");
    const TraceContext& context = source.context();
    const Eigen::Index n = context.group_order();
    const int lo = source.start_degree(), hi = source.end_degree();
    const HodgeData hs = hodge(source);
    const HodgeData ht = hodge(target);
    // h_q : C¹_q → C²_{q−1}
    auto homotopy = [&](int q) -> Matrix {
        return random_a_linear(context, target.module(q - 1).ambient_dim() / n,
                               source.module(q).ambient_dim() / n, rng);
    };
    std::vector<Matrix> h;
    for (int q = lo; q <= hi + 1; ++q) h.push_back(homotopy(q));
    std::vector<Morphism> comps;
    for (int q = lo; q <= hi; ++q) {
        const std::size_t k = static_cast<std::size_t>(q - lo);
        const Matrix y = random_a_linear(context, target.module(q).ambient_dim() / n,
                                         source.module(q).ambient_dim() / n, rng);
        Matrix f = target.differential(q - 1).matrix() * h[k] +
                   h[k + 1] * source.differential(q).matrix() +
                   harmonic_projector(ht, q, target.module(q).ambient_dim()) * y *
                       harmonic_projector(hs, q, source.module(q).ambient_dim());
        comps.emplace_back(source.module(q), target.module(q), f);
    }
    Tolerances loose;
    loose.validation = 1e-8;
    return ComplexMorphism(source, target, comps, loose);
}

ComplexMorphism random_chain_isomorphism(const CochainComplex& source, RandomSource& rng) {
    const TraceContext& context = source.context();
    std::vector<Matrix> bases;
    for (const HilbertModule& m : source.modules())
        bases.push_back(random_a_linear_invertible(context, m.ambient_dim() / context.group_order(), rng));
    const CochainComplex target = source.conjugated(bases);
    std::vector<Morphism> comps;
    for (int q = source.start_degree(); q <= source.end_degree(); ++q)
        comps.emplace_back(source.module(q), target.module(q),
                           bases[static_cast<std::size_t>(q - source.start_degree())]);
    Tolerances loose;
    loose.validation = 1e-8;
    return ComplexMorphism(source, target, comps, loose);
}

ComplexSES random_bounded_ses(const TraceContext& context, int max_length,
                              Eigen::Index max_ambient, RandomSource& rng) {
    if (max_length < 1 || max_ambient < context.group_order())
        throw ValidationError("random_bounded_ses: bounds admit no nonzero complex");
    RandomComplexShape shape;
    shape.max_pairs = 1;
    shape.max_harmonic = 1;
    for (;;) {
        shape.start_degree = rng.uniform_int(0, 1);
        shape.length = rng.uniform_int(1, max_length - shape.start_degree);
        const CochainComplex sub = random_complex(context, shape, rng);
        shape.start_degree = rng.uniform_int(0, 1);
        shape.length = rng.uniform_int(1, max_length - shape.start_degree);
        const CochainComplex quotient = random_complex(context, shape, rng);
        bool fits = true;
        for (int q = 0; q < max_length; ++q)
            fits = fits && sub.module(q).ambient_dim() + quotient.module(q).ambient_dim() <= max_ambient;
        if (fits) return random_ses(sub, quotient, rng);
    }
}

}  // namespace torsionlab
