#include "torsionlab/vn_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace torsionlab {

double Tolerances::rank_for(double norm2, Eigen::Index rows, Eigen::Index cols) const {
    if (rank) return *rank;
    return norm2 * static_cast<double>(std::max(rows, cols)) * std::ldexp(1.0, -40);
}

bool Tolerances::negligible(double defect, double norm_a, double norm_b) const {
    const double big = std::max(norm_a, norm_b);
    return defect <= validation * norm_a * norm_b ||
           defect <= 64.0 * std::numeric_limits<double>::epsilon() * big * big;
}

// ---------------------------------------------------------------------------
// FiniteGroup

FiniteGroup::FiniteGroup(std::vector<std::string> labels, std::vector<std::vector<int>> table)
    : labels_(std::move(labels)), table_(std::move(table)) {
    const int n = static_cast<int>(labels_.size());
    if (n == 0) throw ValidationError("group must have at least one element");
    if (static_cast<int>(table_.size()) != n)
        throw ValidationError("group table has " + std::to_string(table_.size()) +
                              " rows, expected " + std::to_string(n));
    for (const auto& row : table_) {
        if (static_cast<int>(row.size()) != n)
            throw ValidationError("group table is not square");
        for (int v : row)
            if (v < 0 || v >= n) throw ValidationError("group table entry out of range");
    }
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (labels_[a] == labels_[b])
                throw ValidationError("duplicate group element label '" + labels_[a] + "'");

    identity_ = -1;
    for (int e = 0; e < n && identity_ < 0; ++e) {
        bool ok = true;
        for (int a = 0; a < n && ok; ++a) ok = table_[e][a] == a && table_[a][e] == a;
        if (ok) identity_ = e;
    }
    if (identity_ < 0) throw ValidationError("group table has no identity element");

    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                if (table_[table_[a][b]][c] != table_[a][table_[b][c]])
                    throw ValidationError("group table is not associative at (" + labels_[a] +
                                          ", " + labels_[b] + ", " + labels_[c] + ")");

    inverse_.assign(n, -1);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b)
            if (table_[a][b] == identity_ && table_[b][a] == identity_) inverse_[a] = b;
        if (inverse_[a] < 0) throw ValidationError("element '" + labels_[a] + "' has no inverse");
    }
}

FiniteGroup FiniteGroup::cyclic(int order) {
    if (order < 1) throw ValidationError("cyclic group order must be positive");
    std::vector<std::string> labels;
    std::vector<std::vector<int>> table(order, std::vector<int>(order));
    for (int k = 0; k < order; ++k) {
        labels.push_back(k == 0 ? "e" : (k == 1 ? "t" : "t^" + std::to_string(k)));
        for (int j = 0; j < order; ++j) table[k][j] = (k + j) % order;
    }
    return FiniteGroup(std::move(labels), std::move(table));
}

FiniteGroup FiniteGroup::symmetric(int n) {
    if (n < 1 || n > 5) throw ValidationError("symmetric group degree must be in 1..5");
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> perms;
    do {
        perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::map<std::vector<int>, int> index;
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < perms.size(); ++k) {
        index[perms[k]] = static_cast<int>(k);
        std::string label = "s";
        for (int v : perms[k]) label += std::to_string(v);
        labels.push_back(k == 0 ? "e" : label);
    }
    std::vector<std::vector<int>> table(perms.size(), std::vector<int>(perms.size()));
    for (std::size_t a = 0; a < perms.size(); ++a)
        for (std::size_t b = 0; b < perms.size(); ++b) {
            std::vector<int> c(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) c[static_cast<std::size_t>(k)] = perms[a][static_cast<std::size_t>(perms[b][static_cast<std::size_t>(k)])];
            table[a][b] = index.at(c);
        }
    return FiniteGroup(std::move(labels), std::move(table));
}

int FiniteGroup::power(int a, long exponent) const {
    int base = exponent < 0 ? inverse_[a] : a;
    unsigned long k = exponent < 0 ? static_cast<unsigned long>(-exponent)
                                   : static_cast<unsigned long>(exponent);
    int result = identity_;
    while (k > 0) {
        if (k & 1UL) result = table_[result][base];
        base = table_[base][base];
        k >>= 1;
    }
    return result;
}

int FiniteGroup::index_of(std::string_view label) const {
    for (int a = 0; a < order(); ++a)
        if (labels_[a] == label) return a;
    // "x^k" with x a label and k a (possibly negative) integer.
    const std::size_t caret = label.rfind('^');
    if (caret != std::string_view::npos && caret > 0 && caret + 1 < label.size()) {
        const std::string exponent(label.substr(caret + 1));
        char* end = nullptr;
        const long k = std::strtol(exponent.c_str(), &end, 10);
        if (end && *end == '\0') {
            for (int a = 0; a < order(); ++a)
                if (labels_[a] == label.substr(0, caret)) return power(a, k);
        }
    }
    throw ValidationError("unknown group element '" + std::string(label) + "'");
}

// ---------------------------------------------------------------------------
// TraceContext / HilbertModule

TraceContext TraceContext::finite_group(FiniteGroup group) {
    TraceContext ctx;
    ctx.group_ = std::make_shared<const FiniteGroup>(std::move(group));
    return ctx;
}

const FiniteGroup& TraceContext::group() const {
    if (!group_) throw ValidationError("trace context is the complex field, not a finite group");
    return *group_;
}

std::string TraceContext::describe() const {
    if (!group_) return "C";
    std::ostringstream out;
    out << "finite group of order " << group_->order();
    return out.str();
}

bool TraceContext::operator==(const TraceContext& other) const {
    if (!group_ || !other.group_) return !group_ && !other.group_;
    return group_ == other.group_ || *group_ == *other.group_;
}

HilbertModule HilbertModule::free(const TraceContext& context, Eigen::Index rank) {
    if (rank < 0) throw ValidationError("module rank must be nonnegative");
    return HilbertModule(context, rank * context.group_order(), true);
}

HilbertModule HilbertModule::subspace(const TraceContext& context, Eigen::Index ambient_dim) {
    if (ambient_dim < 0) throw ValidationError("module dimension must be nonnegative");
    return HilbertModule(context, ambient_dim, context.is_complex_field());
}

Eigen::Index HilbertModule::free_rank() const {
    if (!free_) throw ValidationError("module has no free layout");
    return ambient_ / context_.group_order();
}

HilbertModule HilbertModule::direct_sum(const HilbertModule& other) const {
    if (!(context_ == other.context_))
        throw ValidationError("direct sum of modules over different trace contexts");
    return HilbertModule(context_, ambient_ + other.ambient_, free_ && other.free_);
}

// ---------------------------------------------------------------------------
// Morphism

Morphism::Morphism(HilbertModule domain, HilbertModule codomain, Matrix matrix)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), matrix_(std::move(matrix)) {
    if (!(domain_.context() == codomain_.context()))
        throw ValidationError("morphism between modules over different trace contexts");
    if (matrix_.rows() != codomain_.ambient_dim() || matrix_.cols() != domain_.ambient_dim()) {
        std::ostringstream out;
        out << "morphism matrix is " << matrix_.rows() << "x" << matrix_.cols() << ", expected "
            << codomain_.ambient_dim() << "x" << domain_.ambient_dim();
        throw ValidationError(out.str());
    }
}

Morphism Morphism::identity(const HilbertModule& module) {
    return {module, module, Matrix::Identity(module.ambient_dim(), module.ambient_dim())};
}

Morphism Morphism::zero(const HilbertModule& domain, const HilbertModule& codomain) {
    return {domain, codomain, Matrix::Zero(codomain.ambient_dim(), domain.ambient_dim())};
}

Morphism Morphism::adjoint() const { return {codomain_, domain_, matrix_.adjoint()}; }

Morphism Morphism::scaled(Complex factor) const { return {domain_, codomain_, factor * matrix_}; }

Morphism operator*(const Morphism& g, const Morphism& f) {
    if (g.domain_.ambient_dim() != f.codomain_.ambient_dim())
        throw ValidationError("morphisms are not composable");
    return {f.domain_, g.codomain_, g.matrix_ * f.matrix_};
}

Morphism operator+(const Morphism& a, const Morphism& b) {
    if (a.matrix_.rows() != b.matrix_.rows() || a.matrix_.cols() != b.matrix_.cols())
        throw ValidationError("sum of morphisms with different shapes");
    return {a.domain_, a.codomain_, a.matrix_ + b.matrix_};
}

// ---------------------------------------------------------------------------
// Spectral data

SpectralDistribution SpectralDistribution::from_values(std::vector<double> values, double kappa,
                                                       double zero_tol) {
    SpectralDistribution dist;
    for (double& v : values) {
        if (v <= zero_tol) v = 0.0;
    }
    std::sort(values.begin(), values.end());
    dist.total = kappa * static_cast<double>(values.size());
    const double scale = values.empty() ? 0.0 : std::max(1.0, values.back());
    const double merge_tol = 1e-10 * scale;
    std::size_t count = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        ++count;
        const bool last_in_group = i + 1 == values.size() || values[i + 1] - values[i] > merge_tol;
        if (last_in_group) dist.jumps.push_back({values[i], kappa * static_cast<double>(count)});
    }
    return dist;
}

double SpectralDistribution::operator()(double lambda) const {
    double value = 0.0;
    for (const auto& jump : jumps) {
        if (jump.lambda > lambda) break;
        value = jump.value;
    }
    return value;
}

double SpectralDistribution::half_log_integral() const {
    double sum = 0.0;
    double previous = 0.0;
    for (const auto& jump : jumps) {
        if (jump.lambda > 0.0) sum += 0.5 * std::log(jump.lambda) * (jump.value - previous);
        previous = jump.value;
    }
    return sum;
}

RealVector singular_values(const Matrix& matrix) {
    if (matrix.size() == 0) return RealVector(0);
    Eigen::JacobiSVD<Matrix> svd(matrix);
    return svd.singularValues();
}

RealVector hermitian_eigenvalues(const Matrix& matrix) {
    if (matrix.size() == 0) return RealVector(0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix, Eigen::EigenvaluesOnly);
    return eig.eigenvalues();
}

double operator_norm(const Matrix& matrix) {
    const RealVector s = singular_values(matrix);
    return s.size() == 0 ? 0.0 : s(0);
}

double default_rank_tol(const Matrix& matrix, const Tolerances& tol) {
    return tol.rank_for(operator_norm(matrix), matrix.rows(), matrix.cols());
}

Eigen::Index numerical_rank(const Matrix& matrix, const Tolerances& tol) {
    const RealVector s = singular_values(matrix);
    if (s.size() == 0) return 0;
    const double cutoff = tol.rank_for(s(0), matrix.rows(), matrix.cols());
    return (s.array() > cutoff).count();
}

Matrix truncate_singular_values(const Matrix& matrix, double threshold) {
    if (matrix.size() == 0) return matrix;
    Eigen::JacobiSVD<Matrix> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    RealVector s = svd.singularValues();
    if (s.size() == 0 || s(s.size() - 1) > threshold) return matrix;
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) <= threshold) s(k) = 0.0;
    return svd.matrixU() * s.cast<Complex>().asDiagonal() * svd.matrixV().adjoint();
}

Complex vn_trace(const Morphism& op) {
    if (!op.is_endomorphism()) throw ValidationError("trace of a non-square morphism");
    return op.context().kappa() * op.matrix().trace();
}

PolarDecomposition polar_decompose(const Morphism& f, const Tolerances& tol) {
    const Matrix& a = f.matrix();
    if (a.size() == 0)
        return {Morphism::zero(f.domain(), f.codomain()), Morphism::zero(f.domain(), f.domain())};
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    const double cutoff = tol.rank_for(s(0), a.rows(), a.cols());
    const Eigen::Index r = (s.array() > cutoff).count();
    const Matrix& u = svd.matrixU();
    const Matrix& v = svd.matrixV();
    Matrix positive = v.leftCols(r) * s.head(r).cast<Complex>().asDiagonal() * v.leftCols(r).adjoint();
    Matrix isometry = u.leftCols(r) * v.leftCols(r).adjoint();
    return {Morphism(f.domain(), f.codomain(), std::move(isometry)),
            Morphism(f.domain(), f.domain(), std::move(positive))};
}

SpectralDistribution spectral_distribution(const Morphism& f, const Tolerances& tol) {
    const Matrix& a = f.matrix();
    const Eigen::Index n = a.cols();
    std::vector<double> squares(static_cast<std::size_t>(n), 0.0);
    const RealVector s = singular_values(a);
    double zero_tol = 0.0;
    if (s.size() > 0) {
        const double cutoff = tol.rank_for(s(0), a.rows(), a.cols());
        zero_tol = cutoff * cutoff;
        for (Eigen::Index i = 0; i < s.size() && i < n; ++i)
            squares[static_cast<std::size_t>(i)] = s(i) > cutoff ? s(i) * s(i) : 0.0;
    }
    return SpectralDistribution::from_values(std::move(squares), f.context().kappa(), zero_tol);
}

double log_vol(const Morphism& f, const Tolerances& tol) {
    const Matrix& a = f.matrix();
    const RealVector s = singular_values(a);
    if (s.size() == 0) return 0.0;
    const double cutoff = tol.rank_for(s(0), a.rows(), a.cols());
    double sum = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cutoff) sum += std::log(s(i));
    return f.context().kappa() * sum;
}

bool is_determinant_class(const Morphism& f, const Tolerances& tol) {
    return std::isfinite(log_vol(f, tol));
}

namespace {

void require_invertible(const Morphism& f, const Tolerances& tol, const char* name) {
    const Matrix& a = f.matrix();
    if (a.rows() != a.cols() || numerical_rank(a, tol) != a.rows())
        throw ValidationError(std::string(name) + " is not invertible");
}

}  // namespace

double log_vol_additivity_residual(const Morphism& f, const Morphism& g, const Tolerances& tol) {
    if (g.domain().ambient_dim() != f.codomain().ambient_dim())
        throw ValidationError("morphisms are not composable");
    require_invertible(f, tol, "f");
    require_invertible(g, tol, "g");
    return std::abs(log_vol(g * f, tol) - log_vol(g, tol) - log_vol(f, tol));
}

Morphism block_upper_triangular(const Morphism& f, const Morphism& g, const Morphism& h) {
    if (h.domain().ambient_dim() != g.domain().ambient_dim() ||
        h.codomain().ambient_dim() != f.codomain().ambient_dim())
        throw ValidationError("off-diagonal block h must map W2 -> W1'");
    const Eigen::Index r1 = f.matrix().rows(), c1 = f.matrix().cols();
    const Eigen::Index r2 = g.matrix().rows(), c2 = g.matrix().cols();
    Matrix block = Matrix::Zero(r1 + r2, c1 + c2);
    block.topLeftCorner(r1, c1) = f.matrix();
    block.topRightCorner(r1, c2) = h.matrix();
    block.bottomRightCorner(r2, c2) = g.matrix();
    return {f.domain().direct_sum(g.domain()), f.codomain().direct_sum(g.codomain()),
            std::move(block)};
}

double block_triangular_log_vol_residual(const Morphism& f, const Morphism& g, const Morphism& h,
                                         const Tolerances& tol) {
    require_invertible(f, tol, "f");
    require_invertible(g, tol, "g");
    const Morphism block = block_upper_triangular(f, g, h);
    return std::abs(log_vol(block, tol) - log_vol(f, tol) - log_vol(g, tol));
}

// ---------------------------------------------------------------------------
// Group algebra

Matrix regular_representation(const FiniteGroup& group,
                              const std::vector<std::pair<int, Complex>>& terms) {
    const int n = group.order();
    Matrix m = Matrix::Zero(n, n);
    for (const auto& [g, c] : terms)
        for (int x = 0; x < n; ++x) m(group.multiply(x, g), x) += c;  // e_x ↦ e_{xg}
    return m;
}

Matrix left_translation(const FiniteGroup& group, Eigen::Index rank, int element) {
    const int n = group.order();
    Matrix m = Matrix::Zero(rank * n, rank * n);
    for (Eigen::Index b = 0; b < rank; ++b)
        for (int x = 0; x < n; ++x) m(b * n + group.multiply(element, x), b * n + x) = 1.0;
    return m;
}

Morphism group_ring_matrix(const GroupWord& word, const TraceContext& context, int fiber_dim) {
    if (fiber_dim < 0) throw ValidationError("fiber dimension must be nonnegative");
    const FiniteGroup& group = context.group();
    std::vector<std::pair<int, Complex>> terms;
    terms.reserve(word.size());
    for (const auto& term : word) terms.emplace_back(group.index_of(term.element), term.coeff);
    const Matrix block = regular_representation(group, terms);
    const Matrix m = Eigen::kroneckerProduct(Matrix::Identity(fiber_dim, fiber_dim), block).eval();
    const HilbertModule module = HilbertModule::free(context, fiber_dim);
    return {module, module, m};
}

double a_linearity_defect(const Morphism& f) {
    const TraceContext& ctx = f.context();
    if (ctx.is_complex_field()) return 0.0;
    const FiniteGroup& group = ctx.group();
    const Eigen::Index rd = f.domain().free_rank();
    const Eigen::Index rc = f.codomain().free_rank();
    double defect = 0.0;
    for (int h = 0; h < group.order(); ++h) {
        const Matrix lhs = f.matrix() * left_translation(group, rd, h);
        const Matrix rhs = left_translation(group, rc, h) * f.matrix();
        defect = std::max(defect, (lhs - rhs).norm());
    }
    return defect;
}

TraceContext combined_context(const TraceContext& a, const TraceContext& b) {
    if (!a.is_complex_field() && !b.is_complex_field())
        throw ValidationError(
            "tensor products of two finite-group contexts are not supported; one factor must be "
            "over the complex field");
    return a.is_complex_field() ? b : a;
}

Matrix layout_kron(const Matrix& a, const TraceContext& a_context, const Matrix& b,
                   const TraceContext& b_context) {
    (void)combined_context(a_context, b_context);
    if (a_context.is_complex_field()) return Eigen::kroneckerProduct(a, b).eval();
    // a carries the group: reorder kron(a, b) so the group index stays minor.
    const Eigen::Index n = a_context.group_order();
    auto index = [n](Eigen::Index i_a, Eigen::Index i_b, Eigen::Index b_dim) {
        const Eigen::Index block = i_a / n, g = i_a % n;
        return (block * b_dim + i_b) * n + g;
    };
    Matrix out = Matrix::Zero(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index ra = 0; ra < a.rows(); ++ra)
        for (Eigen::Index ca = 0; ca < a.cols(); ++ca) {
            const Complex av = a(ra, ca);
            if (av == Complex(0.0)) continue;
            for (Eigen::Index rb = 0; rb < b.rows(); ++rb)
                for (Eigen::Index cb = 0; cb < b.cols(); ++cb)
                    out(index(ra, rb, b.rows()), index(ca, cb, b.cols())) = av * b(rb, cb);
        }
    return out;
}

}  // namespace torsionlab
