#include "torsionlab/twisted_cw.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <unsupported/Eigen/KroneckerProduct>

namespace torsionlab {

namespace {

double parity(long k) { return (k % 2 == 0) ? 1.0 : -1.0; }

Matrix matrix_power(const Matrix& m, long p) {
    if (p < 0) return matrix_power(m.adjoint(), -p);  // unitary
    Matrix result = Matrix::Identity(m.rows(), m.cols());
    Matrix base = m;
    while (p > 0) {
        if (p & 1) result = result * base;
        base = base * base;
        p >>= 1;
    }
    return result;
}

void check_compatible(const TwistedCellComplex& a, const TwistedCellComplex& b, const char* what) {
    if (a.kind != b.kind || !(a.context == b.context) || a.fiber_dim != b.fiber_dim)
        throw ValidationError(std::string(what) + ": coefficient systems differ");
    if (a.top_degree != b.top_degree)
        throw ValidationError(std::string(what) + ": top degrees differ (" +
                              std::to_string(a.top_degree) + " vs " +
                              std::to_string(b.top_degree) + ")");
    for (const auto& [name, m] : a.representation) {
        auto it = b.representation.find(name);
        if (it != b.representation.end() && (it->second - m).norm() > 1e-12)
            throw ValidationError(std::string(what) + ": generator '" + name +
                                  "' has two different representations");
    }
}

std::map<std::string, Matrix> merged_representation(const TwistedCellComplex& a,
                                                    const TwistedCellComplex& b) {
    std::map<std::string, Matrix> rep = a.representation;
    rep.insert(b.representation.begin(), b.representation.end());
    return rep;
}

HilbertModule cell_module(const TwistedCellComplex& cw, int degree) {
    return HilbertModule::free(cw.context,
                               static_cast<Eigen::Index>(cw.cell_count(degree)) * cw.fiber_dim);
}

}  // namespace

std::size_t TwistedCellComplex::cell_count(int degree) const {
    if (degree < 0 || degree >= static_cast<int>(cells.size())) return 0;
    return cells[static_cast<std::size_t>(degree)].size();
}

std::pair<int, int> TwistedCellComplex::locate(const std::string& label) const {
    for (std::size_t q = 0; q < cells.size(); ++q)
        for (std::size_t k = 0; k < cells[q].size(); ++k)
            if (cells[q][k] == label) return {static_cast<int>(q), static_cast<int>(k)};
    throw ValidationError("unknown cell '" + label + "'");
}

std::vector<std::string> TwistedCellComplex::all_labels() const {
    std::vector<std::string> out;
    for (const auto& level : cells) out.insert(out.end(), level.begin(), level.end());
    return out;
}

void TwistedCellComplex::validate() const {
    if (fiber_dim < 1) throw ValidationError("fiber dimension must be positive");
    if (top_degree < 0) throw ValidationError("top degree must be nonnegative");
    if (max_degree() > top_degree)
        throw ValidationError("cells of degree " + std::to_string(max_degree()) +
                              " exceed the top degree " + std::to_string(top_degree));
    std::set<std::string> seen;
    for (const auto& label : all_labels())
        if (!seen.insert(label).second) throw ValidationError("duplicate cell label '" + label + "'");

    if (kind == CoefficientKind::FiniteGroup && context.is_complex_field())
        throw ValidationError("finite-group coefficients need a finite-group context");
    if (kind != CoefficientKind::FiniteGroup && !context.is_complex_field())
        throw ValidationError("a finite-group context needs finite-group coefficients");
    if (kind == CoefficientKind::Unitary) {
        for (const auto& [name, m] : representation) {
            if (name == "e") throw ValidationError("the identity 'e' cannot be reassigned");
            if (m.rows() != fiber_dim || m.cols() != fiber_dim)
                throw ValidationError("generator '" + name + "' is not " +
                                      std::to_string(fiber_dim) + "x" + std::to_string(fiber_dim));
            const double defect =
                (m.adjoint() * m - Matrix::Identity(fiber_dim, fiber_dim)).norm();
            if (defect > 1e-10)
                throw ValidationError("generator '" + name + "' is not unitary (defect " +
                                      std::to_string(defect) + ")");
        }
    }

    for (const auto& inc : incidences) {
        const auto [qf, kf] = locate(inc.from);
        const auto [qt, kt] = locate(inc.to);
        (void)kf;
        (void)kt;
        if (qt != qf + 1)
            throw ValidationError("incidence " + inc.from + " -> " + inc.to +
                                  " does not raise the degree by one");
        for (const auto& term : inc.word) {
            if (kind == CoefficientKind::FiniteGroup) {
                (void)context.group().index_of(term.element);
            } else if (kind == CoefficientKind::Unitary) {
                if (term.element != "e" && !representation.count(term.element))
                    throw ValidationError("incidence " + inc.from + " -> " + inc.to +
                                          " uses unknown generator '" + term.element + "'");
            } else if (term.element != "e" && term.element != "t") {
                throw ValidationError("Laurent coefficients only know 'e' and 't', got '" +
                                      term.element + "'");
            }
        }
    }
}

Matrix evaluate_word(const TwistedCellComplex& cw, const IncidenceWord& word) {
    const Eigen::Index k = cw.fiber_dim;
    switch (cw.kind) {
        case CoefficientKind::FiniteGroup: {
            const FiniteGroup& group = cw.context.group();
            std::vector<std::pair<int, Complex>> terms;
            for (const auto& term : word)
                terms.emplace_back(group.power(group.index_of(term.element), term.power), term.coeff);
            const Matrix block = regular_representation(group, terms);
            return Eigen::kroneckerProduct(Matrix::Identity(k, k), block).eval();
        }
        case CoefficientKind::Unitary: {
            Matrix out = Matrix::Zero(k, k);
            for (const auto& term : word) {
                if (term.element == "e") {
                    out += term.coeff * Matrix::Identity(k, k);
                    continue;
                }
                auto it = cw.representation.find(term.element);
                if (it == cw.representation.end())
                    throw ValidationError("unknown generator '" + term.element + "'");
                out += term.coeff * matrix_power(it->second, term.power);
            }
            return out;
        }
        case CoefficientKind::IntegerLaurent:
            break;
    }
    throw ValidationError("complexes over Z have infinite-dimensional cochains; use the lueck "
                          "module (Laurent matrices) instead");
}

IncidenceWord adjoint_word(const IncidenceWord& word) {
    IncidenceWord out;
    out.reserve(word.size());
    for (const auto& term : word) out.push_back({term.element, -term.power, std::conj(term.coeff)});
    return out;
}

CochainComplex build_complex(const TwistedCellComplex& cw, const Tolerances& tol) {
    cw.validate();
    if (cw.kind == CoefficientKind::IntegerLaurent)
        throw ValidationError("complexes over Z have infinite-dimensional cochains; use the lueck "
                              "module (Laurent matrices) instead");
    const int d = cw.top_degree;
    const Eigen::Index k = cw.fiber_dim;
    std::vector<HilbertModule> modules;
    std::vector<Matrix> blocks;
    for (int q = 0; q <= d; ++q) modules.push_back(cell_module(cw, q));
    for (int q = 0; q < d; ++q)
        blocks.push_back(Matrix::Zero(modules[q + 1].ambient_dim(), modules[q].ambient_dim()));

    const Eigen::Index g = cw.context.group_order();
    const Eigen::Index width = k * g;
    for (const auto& inc : cw.incidences) {
        const auto [q, from] = cw.locate(inc.from);
        const int to = cw.locate(inc.to).second;
        blocks[q].block(to * width, from * width, width, width) += evaluate_word(cw, inc.word);
    }

    // δ∘δ = 0, reported per offending pair of cells.
    for (int q = 0; q + 1 < d; ++q) {
        const Matrix dd = blocks[q + 1] * blocks[q];
        const double na = blocks[q + 1].norm(), nb = blocks[q].norm();
        if (tol.negligible(dd.norm(), na, nb)) continue;
        for (std::size_t x = 0; x < cw.cell_count(q); ++x)
            for (std::size_t z = 0; z < cw.cell_count(q + 2); ++z) {
                const double entry =
                    dd.block(static_cast<Eigen::Index>(z) * width,
                             static_cast<Eigen::Index>(x) * width, width, width)
                        .norm();
                if (!tol.negligible(entry, na, nb))
                    throw ValidationError("delta o delta != 0 from cell '" +
                                          cw.cells[q][x] + "' to cell '" + cw.cells[q + 2][z] +
                                          "' (norm " + std::to_string(entry) + ")");
            }
    }

    std::vector<Morphism> diffs;
    for (int q = 0; q < d; ++q) diffs.emplace_back(modules[q], modules[q + 1], blocks[q]);
    return CochainComplex(std::move(modules), std::move(diffs), 0, tol);
}

TcombReport t_comb_report(const TwistedCellComplex& cw, const Tolerances& tol) {
    const CochainComplex c = build_complex(cw, tol);
    TcombReport report;
    report.via_laplacians = torsion_via_laplacians(c, tol);
    report.via_hodge = torsion(c, tol);
    report.euler_characteristic = c.euler_characteristic();
    const double gap = std::abs(report.via_laplacians - report.via_hodge);
    if (gap > 1e-8 * std::max(1.0, std::abs(report.via_hodge)))
        throw NumericalError("combinatorial torsion: Laplacian and Hodge routes disagree by " +
                             std::to_string(gap));
    return report;
}

double t_comb(const TwistedCellComplex& cw, const Tolerances& tol) {
    return t_comb_report(cw, tol).value();
}

TwistedCellComplex dual_complex(const TwistedCellComplex& cw) {
    cw.validate();
    const int d = cw.top_degree;
    TwistedCellComplex dual = cw;
    dual.incidences.clear();
    dual.cells.assign(static_cast<std::size_t>(d + 1), {});
    for (int q = 0; q <= cw.max_degree(); ++q)
        dual.cells[static_cast<std::size_t>(d - q)] = cw.cells[static_cast<std::size_t>(q)];
    while (!dual.cells.empty() && dual.cells.back().empty()) dual.cells.pop_back();
    for (const auto& inc : cw.incidences) {
        const int q = cw.locate(inc.from).first;
        const double s = parity(static_cast<long>(q) * (d - q));
        IncidenceWord word = adjoint_word(inc.word);
        for (auto& term : word) term.coeff *= s;
        dual.incidences.push_back({inc.to, inc.from, std::move(word)});
    }
    return dual;
}

DualityReport duality_check(const TwistedCellComplex& cw, const Tolerances& tol) {
    const TwistedCellComplex dual = dual_complex(cw);
    const int d = cw.top_degree;
    DualityReport report;
    report.top_degree = d;
    report.t_comb = t_comb(cw, tol);
    report.t_comb_dual = t_comb(dual, tol);
    report.torsion_residual = std::abs(report.t_comb - parity(d + 1) * report.t_comb_dual);

    // Both complexes list the cells of each dual pair in the same order, so
    // the identifications J_q are identity matrices.
    const CochainComplex c = build_complex(cw, tol);
    const CochainComplex cd = build_complex(dual, tol);
    for (int q = 0; q < d; ++q) {
        const Matrix lhs = c.differential(q).matrix();
        const Matrix rhs =
            parity(static_cast<long>(q) * (d - q)) * cd.differential(d - q - 1).matrix().adjoint();
        if (lhs.size() == 0) continue;
        report.intertwining_residual = std::max(report.intertwining_residual, (lhs - rhs).norm());
    }
    return report;
}

GluedComplex glue(const GluingSpec& spec, const Tolerances& tol) {
    spec.lower.validate();
    spec.upper.validate();
    check_compatible(spec.lower, spec.upper, "gluing");
    const int d = spec.lower.top_degree;

    TwistedCellComplex glued;
    glued.context = spec.lower.context;
    glued.kind = spec.lower.kind;
    glued.fiber_dim = spec.lower.fiber_dim;
    glued.top_degree = d;
    glued.representation = merged_representation(spec.lower, spec.upper);
    glued.cells.assign(static_cast<std::size_t>(d + 1), {});
    for (int q = 0; q <= d; ++q) {
        auto& level = glued.cells[static_cast<std::size_t>(q)];
        if (q <= spec.upper.max_degree())
            level = spec.upper.cells[static_cast<std::size_t>(q)];
        if (q <= spec.lower.max_degree())
            level.insert(level.end(), spec.lower.cells[static_cast<std::size_t>(q)].begin(),
                         spec.lower.cells[static_cast<std::size_t>(q)].end());
    }
    glued.incidences = spec.upper.incidences;
    glued.incidences.insert(glued.incidences.end(), spec.lower.incidences.begin(),
                            spec.lower.incidences.end());
    for (const auto& inc : spec.coupling) {
        auto in = [](const TwistedCellComplex& cw, const std::string& label) {
            for (const auto& level : cw.cells)
                for (const auto& l : level)
                    if (l == label) return true;
            return false;
        };
        if (!in(spec.lower, inc.from) || !in(spec.upper, inc.to))
            throw ValidationError("coupling " + inc.from + " -> " + inc.to +
                                  " must run from a lower cell to an upper cell");
        glued.incidences.push_back(inc);
    }

    CochainComplex total = build_complex(glued, tol);
    const CochainComplex sub = build_complex(spec.upper, tol);
    const CochainComplex quotient = build_complex(spec.lower, tol);

    const Eigen::Index width = glued.fiber_dim * glued.context.group_order();
    std::vector<Morphism> fs, gs;
    for (int q = 0; q <= d; ++q) {
        const Eigen::Index nu = static_cast<Eigen::Index>(spec.upper.cell_count(q)) * width;
        const Eigen::Index nl = static_cast<Eigen::Index>(spec.lower.cell_count(q)) * width;
        Matrix f = Matrix::Zero(nu + nl, nu);
        f.topRows(nu).setIdentity();
        Matrix g = Matrix::Zero(nl, nu + nl);
        g.rightCols(nl).setIdentity();
        fs.emplace_back(sub.module(q), total.module(q), f);
        gs.emplace_back(total.module(q), quotient.module(q), g);
    }
    ComplexMorphism fm(sub, total, std::move(fs), tol);
    ComplexMorphism gm(total, quotient, std::move(gs), tol);
    ComplexSES ses(std::move(fm), std::move(gm), tol);
    return {std::move(glued), std::move(total), std::move(ses)};
}

GlueReport glue_check(const GluingSpec& spec, const Tolerances& tol) {
    const GluedComplex g = glue(spec, tol);
    GlueReport report;
    report.t_comb_glued = t_comb(g.glued, tol);
    report.t_comb_lower = t_comb(spec.lower, tol);
    report.t_comb_upper = t_comb(spec.upper, tol);
    report.milnor = milnor_check(g.ses, tol);
    report.t_long = report.milnor.torsion_long;
    report.residual = std::abs(report.t_comb_glued - report.t_comb_lower - report.t_comb_upper -
                               report.t_long);
    return report;
}

CochainComplex product_complex(const TwistedCellComplex& first, const TwistedCellComplex& second,
                               const Tolerances& tol) {
    return tensor_product(build_complex(first, tol), build_complex(second, tol), tol);
}

TwistedCellComplex disjoint_union(const TwistedCellComplex& a, const TwistedCellComplex& b) {
    check_compatible(a, b, "disjoint union");
    TwistedCellComplex out = a;
    out.representation = merged_representation(a, b);
    const std::size_t n = std::max(a.cells.size(), b.cells.size());
    out.cells.resize(n);
    for (std::size_t q = 0; q < b.cells.size(); ++q)
        out.cells[q].insert(out.cells[q].end(), b.cells[q].begin(), b.cells[q].end());
    out.incidences.insert(out.incidences.end(), b.incidences.begin(), b.incidences.end());
    out.validate();
    return out;
}

TwistedCellComplex reorient(const TwistedCellComplex& cw, const std::map<std::string, int>& signs) {
    auto sign_of = [&](const std::string& label) {
        auto it = signs.find(label);
        if (it == signs.end()) return 1;
        if (it->second != 1 && it->second != -1)
            throw ValidationError("orientation sign for '" + label + "' must be +1 or -1");
        return it->second;
    };
    for (const auto& entry : signs) (void)cw.locate(entry.first);
    TwistedCellComplex out = cw;
    for (auto& inc : out.incidences) {
        const double s = sign_of(inc.from) * sign_of(inc.to);
        for (auto& term : inc.word) term.coeff *= s;
    }
    return out;
}

namespace builtin {

TwistedCellComplex point() {
    TwistedCellComplex cw;
    cw.top_degree = 0;
    cw.cells = {{"p"}};
    return cw;
}

TwistedCellComplex interval_tau1() {
    TwistedCellComplex cw;
    cw.top_degree = 1;
    return cw;
}

TwistedCellComplex interval_tau2() {
    TwistedCellComplex cw;
    cw.top_degree = 1;
    cw.cells = {{"m"}};
    return cw;
}

TwistedCellComplex circle(Complex holonomy) {
    TwistedCellComplex cw;
    cw.top_degree = 1;
    cw.cells = {{"x"}, {"y"}};
    cw.representation["t"] = Matrix::Constant(1, 1, holonomy);
    cw.incidences.push_back({"x", "y", {{"t", 1, 1.0}, {"e", 1, -1.0}}});
    cw.validate();
    return cw;
}

TwistedCellComplex circle_cyclic(int order) {
    TwistedCellComplex cw;
    cw.context = TraceContext::finite_group(FiniteGroup::cyclic(order));
    cw.kind = CoefficientKind::FiniteGroup;
    cw.top_degree = 1;
    cw.cells = {{"x"}, {"y"}};
    // Z/1 has no element labelled "t"; its generator is e.
    const std::string generator = order == 1 ? "e" : "t";
    cw.incidences.push_back({"x", "y", {{generator, 1, 1.0}, {"e", 1, -1.0}}});
    cw.validate();
    return cw;
}

TwistedCellComplex circle_integers() {
    TwistedCellComplex cw;
    cw.kind = CoefficientKind::IntegerLaurent;
    cw.top_degree = 1;
    cw.cells = {{"x"}, {"y"}};
    cw.incidences.push_back({"x", "y", {{"t", 1, 1.0}, {"e", 1, -1.0}}});
    cw.validate();
    return cw;
}

GluingSpec circle_from_two_arcs(Complex holonomy) {
    GluingSpec spec;
    spec.lower.top_degree = 1;
    spec.lower.cells = {{"x"}};
    spec.lower.representation["t"] = Matrix::Constant(1, 1, holonomy);
    spec.upper.top_degree = 1;
    spec.upper.cells = {{}, {"y"}};
    spec.upper.representation["t"] = Matrix::Constant(1, 1, holonomy);
    spec.coupling.push_back({"x", "y", {{"e", 1, 1.0}, {"t", 1, -1.0}}});
    return spec;
}

std::vector<std::string> names() {
    return {"point", "interval_tau1", "interval_tau2", "circle", "circle_cyclic"};
}

TwistedCellComplex by_name(const std::string& name, double parameter) {
    if (name == "point") return point();
    if (name == "interval_tau1") return interval_tau1();
    if (name == "interval_tau2") return interval_tau2();
    if (name == "circle") return circle(std::polar(1.0, std::numbers::pi * parameter));
    if (name == "circle_cyclic") {
        const double rounded = std::round(parameter);
        if (rounded < 1 || rounded != parameter)
            throw ValidationError("circle_cyclic needs a positive integer order");
        return circle_cyclic(static_cast<int>(rounded));
    }
    throw ValidationError("unknown builtin complex '" + name + "'");
}

}  // namespace builtin

}  // namespace torsionlab
