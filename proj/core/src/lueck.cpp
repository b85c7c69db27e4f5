#include "torsionlab/lueck.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace torsionlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

long floor_mod(long a, long m) {
    const long r = a % m;
    return r < 0 ? r + m : r;
}

// Recursive descent over the grammar
//   expr   := term (('+' | '-') term)*
//   term   := unary (['*'] unary)*
//   unary  := ('+' | '-') unary | power
//   power  := atom ('^' integer)?
//   atom   := number | 'i' | 't' | '(' expr ')'
class PolyParser {
public:
    explicit PolyParser(std::string_view text) : text_(text) {}

    LaurentPoly parse() {
        LaurentPoly p = expr();
        skip();
        if (pos_ != text_.size()) fail("unexpected character");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError("Laurent polynomial '" + std::string(text_) + "': " + what +
                              " at offset " + std::to_string(pos_));
    }

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() {
        skip();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    LaurentPoly expr() {
        LaurentPoly p = term();
        for (;;) {
            const char c = peek();
            if (c == '+') {
                ++pos_;
                p += term();
            } else if (c == '-') {
                ++pos_;
                p = p - term();
            } else {
                return p;
            }
        }
    }

    bool starts_atom(char c) const {
        return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'i' || c == 't' ||
               c == '(';
    }

    LaurentPoly term() {
        LaurentPoly p = unary();
        for (;;) {
            const char c = peek();
            if (c == '*') {
                ++pos_;
                p = p * unary();
            } else if (starts_atom(c)) {
                p = p * unary();
            } else {
                return p;
            }
        }
    }

    LaurentPoly unary() {
        const char c = peek();
        if (c == '-') {
            ++pos_;
            return LaurentPoly(-1.0) * unary();
        }
        if (c == '+') {
            ++pos_;
            return unary();
        }
        return power();
    }

    long integer() {
        skip();
        bool paren = false;
        if (pos_ < text_.size() && text_[pos_] == '(') {
            paren = true;
            ++pos_;
            skip();
        }
        const std::size_t begin = pos_;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string digits(text_.substr(begin, pos_ - begin));
        if (digits.empty() || digits == "-" || digits == "+") fail("expected an integer exponent");
        if (paren) {
            skip();
            if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
            ++pos_;
        }
        return std::stol(digits);
    }

    LaurentPoly power() {
        LaurentPoly base = atom();
        if (peek() != '^') return base;
        ++pos_;
        const long k = integer();
        if (k < 0) {
            if (base.terms().size() != 1) fail("negative powers need a monomial base");
            const auto [e, c] = *base.terms().begin();
            return LaurentPoly::monomial(e * k, std::pow(c, static_cast<double>(k)));
        }
        LaurentPoly out(1.0);
        for (long j = 0; j < k; ++j) out = out * base;
        return out;
    }

    LaurentPoly atom() {
        const char c = peek();
        if (c == '(') {
            ++pos_;
            LaurentPoly p = expr();
            if (peek() != ')') fail("expected ')'");
            ++pos_;
            return p;
        }
        if (c == 't') {
            ++pos_;
            return LaurentPoly::monomial(1);
        }
        if (c == 'i') {
            ++pos_;
            return LaurentPoly(Complex(0.0, 1.0));
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.data() + pos_;
            char* end = nullptr;
            const std::string rest(begin, text_.size() - pos_);
            const double v = std::strtod(rest.c_str(), &end);
            pos_ += static_cast<std::size_t>(end - rest.c_str());
            return LaurentPoly(v);
        }
        fail(c == '\0' ? "unexpected end of input" : std::string("unexpected '") + c + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

Matrix symbol_at_root(const LaurentMatrix& op, long j, long m) {
    Matrix s(op.rows(), op.cols());
    for (int r = 0; r < op.rows(); ++r)
        for (int c = 0; c < op.cols(); ++c) {
            Complex v = 0.0;
            for (const auto& [k, coeff] : op(r, c).terms())
                v += coeff * std::polar(1.0, kTwoPi * static_cast<double>(floor_mod(k * j, m)) /
                                                 static_cast<double>(m));
            s(r, c) = v;
        }
    return s;
}

RealVector symbol_eigenvalues(const Matrix& s) {
    if (s.rows() == 1) return RealVector::Constant(1, s(0, 0).real());
    return hermitian_eigenvalues(s);
}

void require_square_selfadjoint(const LaurentMatrix& op) {
    if (op.rows() != op.cols() || op.rows() == 0)
        throw ValidationError("operator must be a nonempty square Laurent matrix");
    if (!op.is_selfadjoint()) throw ValidationError("operator is not selfadjoint");
}

// Number of eigenvalue branches that are not identically zero.
int generic_rank(const LaurentMatrix& op) {
    int rank = 0;
    for (int k = 1; k <= 7; ++k) {
        const double theta = std::fmod(0.6180339887498949 * k + 0.1234567, 1.0);
        const RealVector e = symbol_eigenvalues(op.symbol(theta));
        const double top = e.cwiseAbs().maxCoeff();
        const double cutoff = Tolerances{}.rank_for(top, op.rows(), op.cols());
        rank = std::max(rank, static_cast<int>((e.array() > cutoff).count()));
    }
    return rank;
}

}  // namespace

// ---------------------------------------------------------------------------
// LaurentPoly

LaurentPoly::LaurentPoly(Complex constant) { add_term(0, constant); }

LaurentPoly LaurentPoly::monomial(long exponent, Complex coeff) {
    LaurentPoly p;
    p.add_term(exponent, coeff);
    return p;
}

LaurentPoly LaurentPoly::parse(std::string_view text) { return PolyParser(text).parse(); }

void LaurentPoly::add_term(long exponent, Complex coeff) {
    Complex& slot = terms_[exponent];
    slot += coeff;
    if (slot == Complex(0.0, 0.0)) terms_.erase(exponent);
}

Complex LaurentPoly::coeff(long exponent) const {
    auto it = terms_.find(exponent);
    return it == terms_.end() ? Complex(0.0, 0.0) : it->second;
}

LaurentPoly LaurentPoly::adjoint() const {
    LaurentPoly p;
    for (const auto& [k, c] : terms_) p.add_term(-k, std::conj(c));
    return p;
}

Complex LaurentPoly::evaluate(Complex z) const {
    Complex v = 0.0;
    for (const auto& [k, c] : terms_) v += c * std::pow(z, static_cast<int>(k));
    return v;
}

double LaurentPoly::coefficient_l1() const {
    double s = 0.0;
    for (const auto& [k, c] : terms_) s += std::abs(c);
    return s;
}

bool LaurentPoly::has_integer_coefficients(double tol) const {
    for (const auto& [k, c] : terms_)
        if (std::abs(c.imag()) > tol || std::abs(c.real() - std::round(c.real())) > tol) return false;
    return true;
}

long LaurentPoly::min_exponent() const { return terms_.empty() ? 0 : terms_.begin()->first; }
long LaurentPoly::max_exponent() const { return terms_.empty() ? 0 : terms_.rbegin()->first; }

std::string LaurentPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream out;
    out.precision(15);
    bool first = true;
    for (const auto& [k, c] : terms_) {
        const bool real = c.imag() == 0.0;
        double magnitude = real ? std::abs(c.real()) : 0.0;
        if (real) {
            out << (c.real() < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
        } else {
            out << (first ? "" : " + ");
        }
        first = false;
        const bool unit_coeff = real && magnitude == 1.0 && k != 0;
        if (!unit_coeff) {
            if (real)
                out << magnitude;
            else
                out << "(" << c.real() << (c.imag() < 0 ? " - " : " + ") << std::abs(c.imag()) << "i)";
        }
        if (k != 0) {
            out << "t";
            if (k != 1) out << "^" << k;
        }
    }
    return out.str();
}

LaurentPoly& LaurentPoly::operator+=(const LaurentPoly& other) {
    for (const auto& [k, c] : other.terms_) add_term(k, c);
    return *this;
}

LaurentPoly operator-(const LaurentPoly& a, const LaurentPoly& b) {
    LaurentPoly out = a;
    for (const auto& [k, c] : b.terms_) out.add_term(k, -c);
    return out;
}

LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
    LaurentPoly out;
    for (const auto& [ka, ca] : a.terms_)
        for (const auto& [kb, cb] : b.terms_) out.add_term(ka + kb, ca * cb);
    return out;
}

// ---------------------------------------------------------------------------
// LaurentMatrix

LaurentMatrix::LaurentMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), entries_(static_cast<std::size_t>(std::max(0, rows * cols))) {
    if (rows < 0 || cols < 0) throw ValidationError("negative Laurent matrix size");
}

LaurentMatrix LaurentMatrix::identity(int n) {
    LaurentMatrix m(n, n);
    for (int k = 0; k < n; ++k) m(k, k) = LaurentPoly(1.0);
    return m;
}

LaurentMatrix LaurentMatrix::adjoint() const {
    LaurentMatrix out(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c).adjoint();
    return out;
}

bool LaurentMatrix::is_selfadjoint(double tol) const {
    if (rows_ != cols_) return false;
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c <= r; ++c) {
            const LaurentPoly diff = (*this)(r, c) - (*this)(c, r).adjoint();
            if (diff.coefficient_l1() > tol) return false;
        }
    return true;
}

bool LaurentMatrix::has_integer_coefficients(double tol) const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [tol](const LaurentPoly& p) { return p.has_integer_coefficients(tol); });
}

Matrix LaurentMatrix::symbol(double theta) const {
    // Σ c_k + Σ c_k (e^{2πikθ} − 1) with e^{ix} − 1 = −2 sin²(x/2) + i sin x on
    // the reduced angle, accumulated in long double. This keeps full relative
    // accuracy near θ = 0 (where Laplacians of Z-covers vanish) and pushes the
    // roundoff floor at other zeros down to about 1e−19.
    using Wide = long double;
    constexpr Wide pi = std::numbers::pi_v<Wide>;
    Matrix s(rows_, cols_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) {
            std::complex<Wide> constant = 0.0L, variation = 0.0L;
            for (const auto& [k, coeff] : (*this)(r, c).terms()) {
                const std::complex<Wide> wc(coeff.real(), coeff.imag());
                constant += wc;
                Wide x = static_cast<Wide>(k) * static_cast<Wide>(theta);
                x -= std::round(x);
                const Wide sh = std::sin(pi * x);
                variation += wc * std::complex<Wide>(-2.0L * sh * sh, std::sin(2.0L * pi * x));
            }
            const std::complex<Wide> v = constant + variation;
            s(r, c) = Complex(static_cast<double>(v.real()), static_cast<double>(v.imag()));
        }
    return s;
}

double LaurentMatrix::gershgorin_bound() const {
    double bound = 0.0;
    for (int r = 0; r < rows_; ++r) {
        double row = 0.0;
        for (int c = 0; c < cols_; ++c) row += (*this)(r, c).coefficient_l1();
        bound = std::max(bound, row);
    }
    return bound;
}

LaurentMatrix operator*(const LaurentMatrix& a, const LaurentMatrix& b) {
    if (a.cols_ != b.rows_) throw ValidationError("Laurent matrix product: inner sizes differ");
    LaurentMatrix out(a.rows_, b.cols_);
    for (int r = 0; r < a.rows_; ++r)
        for (int c = 0; c < b.cols_; ++c)
            for (int k = 0; k < a.cols_; ++k) out(r, c) += a(r, k) * b(k, c);
    return out;
}

LaurentMatrix operator+(const LaurentMatrix& a, const LaurentMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
        throw ValidationError("Laurent matrix sum: sizes differ");
    LaurentMatrix out = a;
    for (std::size_t k = 0; k < out.entries_.size(); ++k) out.entries_[k] += b.entries_[k];
    return out;
}

// ---------------------------------------------------------------------------
// Cell complexes over Z

LaurentMatrix laurent_coboundary(const TwistedCellComplex& cw, int degree) {
    cw.validate();
    if (cw.kind != CoefficientKind::IntegerLaurent || cw.fiber_dim != 1)
        throw ValidationError("Laurent coboundaries need integer-group coefficients with fiber 1");
    LaurentMatrix d(static_cast<int>(cw.cell_count(degree + 1)),
                    static_cast<int>(cw.cell_count(degree)));
    for (const auto& inc : cw.incidences) {
        const auto [q, from] = cw.locate(inc.from);
        if (q != degree) continue;
        const int to = cw.locate(inc.to).second;
        for (const auto& term : inc.word)
            d(to, from) += LaurentPoly::monomial(term.element == "e" ? 0 : term.power, term.coeff);
    }
    return d;
}

LaurentMatrix laurent_laplacian(const TwistedCellComplex& cw, int degree) {
    const int n = static_cast<int>(cw.cell_count(degree));
    LaurentMatrix lap(n, n);
    if (degree + 1 <= cw.top_degree) {
        const LaurentMatrix d = laurent_coboundary(cw, degree);
        if (d.rows() > 0) lap = lap + d.adjoint() * d;
    }
    if (degree >= 1) {
        const LaurentMatrix d = laurent_coboundary(cw, degree - 1);
        if (d.cols() > 0) lap = lap + d * d.adjoint();
    }
    return lap;
}

// ---------------------------------------------------------------------------
// Levels

Morphism specialize(const LaurentMatrix& op, int m) {
    if (m < 1) throw ValidationError("level m must be at least 1");
    const TraceContext ctx = TraceContext::finite_group(FiniteGroup::cyclic(m));
    const FiniteGroup& group = ctx.group();
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(op.rows()) * m,
                              static_cast<Eigen::Index>(op.cols()) * m);
    for (int r = 0; r < op.rows(); ++r)
        for (int c = 0; c < op.cols(); ++c) {
            std::vector<std::pair<int, Complex>> terms;
            for (const auto& [k, coeff] : op(r, c).terms())
                terms.emplace_back(static_cast<int>(floor_mod(k, m)), coeff);
            if (!terms.empty())
                out.block(static_cast<Eigen::Index>(r) * m, static_cast<Eigen::Index>(c) * m, m, m) =
                    regular_representation(group, terms);
        }
    return {HilbertModule::free(ctx, op.cols()), HilbertModule::free(ctx, op.rows()), out};
}

RealVector level_eigenvalues(const LaurentMatrix& op, int m) {
    require_square_selfadjoint(op);
    if (m < 1) throw ValidationError("level m must be at least 1");
    const Eigen::Index n = op.rows();
    RealVector all(n * m);
    for (long j = 0; j < m; ++j) all.segment(j * n, n) = symbol_eigenvalues(symbol_at_root(op, j, m));
    std::sort(all.data(), all.data() + all.size());
    return all;
}

LevelData level_data(const LaurentMatrix& op, int m, const Tolerances& tol) {
    const RealVector eig = level_eigenvalues(op, m);
    const Eigen::Index size = eig.size();
    const double top = std::max(std::abs(eig(0)), std::abs(eig(size - 1)));
    const double cutoff = tol.rank_for(top, size, size);
    if (eig(0) < -cutoff) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "operator is not nonnegative: eigenvalue " << eig(0) << " at level m = " << m;
        throw ValidationError(msg.str());
    }
    const double inv_m = 1.0 / m;
    LevelData level;
    level.m = m;
    level.distribution = SpectralDistribution::from_values(
        std::vector<double>(eig.data(), eig.data() + size), inv_m, cutoff);
    level.largest = std::max(0.0, eig(size - 1));

    std::vector<double> positive;
    for (Eigen::Index k = 0; k < size; ++k)
        if (eig(k) > cutoff) positive.push_back(eig(k));
    level.kernel = inv_m * static_cast<double>(size - static_cast<Eigen::Index>(positive.size()));
    level.smallest_nonzero = positive.empty() ? 0.0 : positive.front();

    double sum = 0.0;
    for (double v : positive) sum += std::log(v);
    level.log_det = inv_m * sum;

    // (log b)(N(b) − N(0)) − ∫_a^b (N(λ) − N(0))/λ dλ over the step function.
    const double b = std::max({op.gershgorin_bound(), level.largest, 1.0});
    const double count = static_cast<double>(positive.size());
    double integral = 0.0;
    for (std::size_t k = 0; k < positive.size(); ++k) {
        const double upper = k + 1 < positive.size() ? positive[k + 1] : b;
        integral += inv_m * static_cast<double>(k + 1) * (std::log(upper) - std::log(positive[k]));
    }
    level.log_det_by_parts = std::log(b) * inv_m * count - integral;
    return level;
}

double level_log_det(const LaurentMatrix& op, int m, const Tolerances& tol) {
    const LevelData level = level_data(op, m, tol);
    const double gap = std::abs(level.log_det - level.log_det_by_parts);
    if (gap > 1e-9)
        throw NumericalError("level m = " + std::to_string(m) +
                             ": eigenvalue sum and integration by parts differ by " +
                             std::to_string(gap));
    return level.log_det;
}

std::vector<int> default_levels() {
    std::vector<int> levels;
    for (int m = 2; m <= 4096; m *= 2) levels.push_back(m);
    return levels;
}

std::vector<int> parse_levels(std::string_view text) {
    const std::string s(text);
    auto to_int = [&](const std::string& piece) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(piece, &used);
        } catch (const std::exception&) {
            throw ValidationError("bad level list '" + s + "'");
        }
        if (used != piece.size() || v < 1) throw ValidationError("bad level list '" + s + "'");
        return v;
    };
    std::vector<int> levels;
    const auto dots = s.find("..");
    if (dots != std::string::npos) {
        const int lo = to_int(s.substr(0, dots));
        const int hi = to_int(s.substr(dots + 2));
        if (lo > hi) throw ValidationError("empty level range '" + s + "'");
        // Powers of two times lo, so consecutive levels divide each other.
        for (long m = lo; m <= hi; m *= 2) levels.push_back(static_cast<int>(m));
        return levels;
    }
    std::stringstream stream(s);
    std::string piece;
    while (std::getline(stream, piece, ',')) levels.push_back(to_int(piece));
    if (levels.empty()) throw ValidationError("empty level list");
    return levels;
}

unsigned worker_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TORSIONLAB_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
    }
    return n;
}

ApproxTower build_tower(const LaurentMatrix& op, std::vector<int> levels, const Tolerances& tol) {
    require_square_selfadjoint(op);
    if (levels.empty()) throw ValidationError("tower needs at least one level");
    for (std::size_t k = 0; k + 1 < levels.size(); ++k)
        if (levels[k + 1] % levels[k] != 0 || levels[k + 1] == levels[k])
            throw ValidationError("levels are not nested: " + std::to_string(levels[k]) +
                                  " does not properly divide " + std::to_string(levels[k + 1]));
    ApproxTower tower;
    tower.op = op;
    tower.levels = levels;
    tower.b = op.gershgorin_bound();
    tower.data.resize(levels.size());

    const unsigned threads =
        std::min<unsigned>(worker_threads(), static_cast<unsigned>(levels.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(levels.size());
    auto work = [&] {
        for (std::size_t k = next++; k < levels.size(); k = next++) {
            try {
                tower.data[k] = level_data(op, levels[k], tol);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (const auto& level : tower.data) {
        const double gap = std::abs(level.log_det - level.log_det_by_parts);
        if (gap > 1e-9)
            throw NumericalError("level m = " + std::to_string(level.m) +
                                 ": eigenvalue sum and integration by parts differ by " +
                                 std::to_string(gap));
    }
    return tower;
}

// ---------------------------------------------------------------------------
// Limits

QuadratureResult fourier_log_det_detailed(const LaurentMatrix& op, const QuadratureConfig& config) {
    require_square_selfadjoint(op);
    const int rank = generic_rank(op);
    const double b = std::max(op.gershgorin_bound(), 1.0);
    auto integrand = [&](double theta) {
        const RealVector e = symbol_eigenvalues(op.symbol(theta));
        double s = 0.0;
        for (Eigen::Index k = e.size() - rank; k < e.size(); ++k) {
            if (e(k) < -1e-8 * b)
                throw ValidationError("symbol is not positive semidefinite at theta = " +
                                      std::to_string(theta));
            if (e(k) > 0.0) s += std::log(e(k));
        }
        return s;
    };
    // Gauss–Kronrod 15/31 pair on [a, b]; the error estimate is |K − G|.
    using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
    using Gauss = boost::math::quadrature::gauss<double, 15>;
    struct Piece {
        double a, b, value, error;
        bool operator<(const Piece& other) const { return error < other.error; }
    };
    // Error estimate as in QUADPACK's QK rules: |K − G| rescaled by
    // (200|K − G|/resasc)^1.5, with a roundoff floor. On an interval ending
    // at a log singularity |K − G| alone underestimates the error.
    auto evaluate = [&](double a, double b2) {
        const auto& x = Rule::abscissa();
        const auto& wk = Rule::weights();
        const auto& wg = Gauss::weights();
        const double half = 0.5 * (b2 - a), center = 0.5 * (a + b2);
        std::vector<double> fp(x.size()), fm(x.size());
        fp[0] = fm[0] = integrand(center);
        for (std::size_t i = 1; i < x.size(); ++i) {
            fp[i] = integrand(center + half * x[i]);
            fm[i] = integrand(center - half * x[i]);
        }
        double kronrod = fp[0] * wk[0], gauss = fp[0] * wg[0], resabs = std::abs(fp[0]) * wk[0];
        for (std::size_t i = 1; i < x.size(); ++i) {
            kronrod += (fp[i] + fm[i]) * wk[i];
            resabs += (std::abs(fp[i]) + std::abs(fm[i])) * wk[i];
            if (i % 2 == 0) gauss += (fp[i] + fm[i]) * wg[i / 2];
        }
        const double mean = 0.5 * kronrod;
        double resasc = std::abs(fp[0] - mean) * wk[0];
        for (std::size_t i = 1; i < x.size(); ++i)
            resasc += (std::abs(fp[i] - mean) + std::abs(fm[i] - mean)) * wk[i];
        double error = std::abs(kronrod - gauss) * half;
        resasc *= half;
        resabs *= half;
        if (resasc > 0.0 && error > 0.0)
            error = resasc * std::min(1.0, std::pow(200.0 * error / resasc, 1.5));
        error = std::max(error, 50.0 * std::numeric_limits<double>::epsilon() * resabs);
        return Piece{a, b2, half * kronrod, error};
    };
    std::priority_queue<Piece> pieces;
    double total = 0.0, total_error = 0.0;
    {
        const Piece p = evaluate(0.0, 1.0);
        pieces.push(p);
        total = p.value;
        total_error = p.error;
    }
    int count = 1;
    while (total_error > config.tolerance && count < config.max_subdivisions) {
        const Piece worst = pieces.top();
        pieces.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Piece left = evaluate(worst.a, mid), right = evaluate(mid, worst.b);
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        pieces.push(left);
        pieces.push(right);
        ++count;
    }
    // Re-sum to drop the drift of the running totals.
    total = 0.0;
    total_error = 0.0;
    while (!pieces.empty()) {
        total += pieces.top().value;
        total_error += pieces.top().error;
        pieces.pop();
    }
    if (total_error > config.tolerance) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "Fourier log-determinant did not converge after " << count
            << " intervals: value in [" << total - total_error << ", " << total + total_error << "]";
        throw NumericalError(msg.str());
    }
    return {total, total_error, count};
}

double fourier_log_det(const LaurentMatrix& op, const QuadratureConfig& config) {
    return fourier_log_det_detailed(op, config).value;
}

double limit_distribution(const LaurentMatrix& op, double lambda, int grid) {
    require_square_selfadjoint(op);
    if (grid < 2) throw ValidationError("grid must have at least two cells");
    const int n = op.rows();
    // The lowest n − rank branches vanish identically.
    const int zero_branches = n - generic_rank(op);
    auto branch = [&](double theta, int k) {
        return symbol_eigenvalues(op.symbol(theta))(k) - lambda;
    };
    std::vector<RealVector> values(static_cast<std::size_t>(grid) + 1);
    for (int i = 0; i <= grid; ++i)
        values[static_cast<std::size_t>(i)] =
            symbol_eigenvalues(op.symbol(static_cast<double>(i) / grid)).array() - lambda;
    double measure = lambda >= 0.0 ? zero_branches : 0.0;
    const double h = 1.0 / grid;
    for (int k = zero_branches; k < n; ++k)
        for (int i = 0; i < grid; ++i) {
            const double fa = values[static_cast<std::size_t>(i)](k);
            const double fb = values[static_cast<std::size_t>(i) + 1](k);
            if (fa <= 0.0 && fb <= 0.0) {
                measure += h;
            } else if ((fa <= 0.0) != (fb <= 0.0)) {
                double lo = i * h, hi = (i + 1) * h;
                const bool left_inside = fa <= 0.0;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    ((branch(mid, k) <= 0.0) == left_inside ? lo : hi) = mid;
                }
                const double cross = 0.5 * (lo + hi);
                measure += left_inside ? cross - i * h : (i + 1) * h - cross;
            }
        }
    return measure;
}

namespace {

std::size_t tail_start(std::size_t levels) { return levels / 2; }

}  // namespace

LimitReport limit_distribution_check(const ApproxTower& tower, double lambda,
                                     const std::vector<double>& epsilons) {
    LimitReport report;
    report.lambda = lambda;
    report.oracle = limit_distribution(tower.op, lambda);
    report.kernel_limit = limit_distribution(tower.op, 0.0);
    const double n = tower.op.rows();
    for (const auto& level : tower.data)
        if (std::abs(level.distribution.total - n) > 1e-12)
            report.anomalies.push_back("level m = " + std::to_string(level.m) + " has total " +
                                       std::to_string(level.distribution.total));
    for (double eps : epsilons) {
        LimitRow row;
        row.epsilon = eps;
        for (const auto& level : tower.data) row.level_values.push_back(level.distribution(lambda + eps));
        row.liminf = *std::min_element(row.level_values.begin() +
                                           static_cast<std::ptrdiff_t>(tail_start(row.level_values.size())),
                                       row.level_values.end());
        if (!report.rows.empty()) {
            const LimitRow& prev = report.rows.back();
            if (eps > prev.epsilon && row.liminf < prev.liminf - 1e-12)
                report.anomalies.push_back("liminf decreases from epsilon " +
                                           std::to_string(prev.epsilon) + " to " +
                                           std::to_string(eps));
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

SemicontinuityReport semicontinuity_check(const ApproxTower& tower, double tol,
                                          const QuadratureConfig& config) {
    SemicontinuityReport report;
    const std::size_t start = tail_start(tower.data.size());
    const double log_b = std::log(std::max({tower.b, 1.0}));
    const double n = tower.op.rows();
    report.oracle_log_det = fourier_log_det(tower.op, config);
    report.liminf_log_det = std::numeric_limits<double>::infinity();
    for (std::size_t k = start; k < tower.data.size(); ++k)
        report.liminf_log_det = std::min(report.liminf_log_det, tower.data[k].log_det);
    report.log_det_bound = report.oracle_log_det <= report.liminf_log_det + tol;

    report.oracle_integral =
        log_b * (n - limit_distribution(tower.op, 0.0)) - report.oracle_log_det;
    for (const auto& level : tower.data)
        report.level_integrals.push_back(log_b * (n - level.kernel) - level.log_det);

    std::vector<double> deficits;
    for (std::size_t k = start; k < report.level_integrals.size(); ++k)
        deficits.push_back(report.oracle_integral - report.level_integrals[k]);
    const bool reached = std::all_of(deficits.begin(), deficits.end(),
                                     [tol](double d) { return d <= tol; });
    bool shrinking = deficits.size() >= 2;
    for (std::size_t k = 0; k + 1 < deficits.size(); ++k)
        if (!(deficits[k + 1] < deficits[k])) shrinking = false;
    if (shrinking) shrinking = deficits.back() <= 0.5 * deficits.front();
    report.integral_bound = reached || shrinking;
    return report;
}

NonnegativityReport nonnegativity_check(const ApproxTower& tower, double tol,
                                        const QuadratureConfig& config) {
    if (!tower.op.has_integer_coefficients())
        throw ValidationError("nonnegativity check needs integer coefficients");
    NonnegativityReport report;
    const double integer_limit = std::ldexp(1.0, 20);
    for (const auto& level : tower.data) {
        const double log_det_prime = level.m * level.log_det;
        const double det = std::exp(log_det_prime);
        report.det_prime.push_back(det);
        if (log_det_prime < -tol) {
            report.passed = false;
            report.violations.push_back("level m = " + std::to_string(level.m) +
                                        ": log det' = " + std::to_string(log_det_prime) + " < 0");
        }
        if (det <= integer_limit) {
            const double residual = std::abs(det - std::round(det));
            report.integer_residual.push_back(residual);
            ++report.integrality_checked;
            if (residual > 1e-6) {
                report.passed = false;
                report.violations.push_back("level m = " + std::to_string(level.m) + ": det' = " +
                                            std::to_string(det) + " is not an integer");
            }
        } else {
            report.integer_residual.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    report.fourier = fourier_log_det(tower.op, config);
    if (report.fourier < -tol) {
        report.passed = false;
        report.violations.push_back("limit: Fourier log det' = " + std::to_string(report.fourier) +
                                    " < 0");
    }
    return report;
}

}  // namespace torsionlab
