#include "io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace torsionlab::io {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ValidationError(where + ": " + what);
}

const Json& member(const Json& doc, const char* key, const std::string& where) {
    if (!doc.is_object() || !doc.contains(key)) fail(where, std::string("missing \"") + key + "\"");
    return doc.at(key);
}

long integer(const Json& value, const std::string& where) {
    if (!value.is_number_integer()) fail(where, "expected an integer");
    return value.get<long>();
}

std::string text(const Json& value, const std::string& where) {
    if (!value.is_string()) fail(where, "expected a string");
    return value.get<std::string>();
}

Complex scalar_at(const Json& value, const std::string& where) {
    if (value.is_number()) return {value.get<double>(), 0.0};
    if (value.is_array() && value.size() == 2 && value[0].is_number() && value[1].is_number())
        return {value[0].get<double>(), value[1].get<double>()};
    fail(where, "expected a number or [re, im]");
}

Matrix matrix_at(const Json& value, Eigen::Index rows, Eigen::Index cols, const std::string& where) {
    if (!value.is_array() || static_cast<Eigen::Index>(value.size()) != rows)
        fail(where, "expected " + std::to_string(rows) + " rows");
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Json& row = value[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            fail(where, "row " + std::to_string(r) + " needs " + std::to_string(cols) + " entries");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = scalar_at(row[static_cast<std::size_t>(c)],
                                where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    return m;
}

CochainComplex complex_at(const Json& doc, const Tolerances& tol, const std::string& where) {
    const TraceContext ctx = parse_context(doc.is_object() && doc.contains("context") ? doc.at("context") : Json());
    const int start = doc.contains("start_degree")
                          ? static_cast<int>(integer(doc.at("start_degree"), where + ".start_degree"))
                          : 0;
    const Json& ranks = member(doc, "ranks", where);
    if (!ranks.is_array()) fail(where + ".ranks", "expected an array");
    std::vector<HilbertModule> modules;
    for (std::size_t k = 0; k < ranks.size(); ++k)
        modules.push_back(HilbertModule::free(ctx, integer(ranks[k], where + ".ranks")));
    const std::size_t expected = modules.empty() ? 0 : modules.size() - 1;
    const Json empty = Json::array();
    const Json& ds = doc.contains("differentials") ? doc.at("differentials") : empty;
    if (!ds.is_array() || ds.size() != expected)
        fail(where + ".differentials", "expected " + std::to_string(expected) + " matrices");
    std::vector<Morphism> diffs;
    for (std::size_t k = 0; k < expected; ++k) {
        const std::string at = where + ".differentials[" + std::to_string(k) + "]";
        diffs.emplace_back(modules[k], modules[k + 1],
                           matrix_at(ds[k], modules[k + 1].ambient_dim(), modules[k].ambient_dim(), at));
    }
    return {std::move(modules), std::move(diffs), start, tol};
}

WordTerm term_at(const Json& value, const std::string& where) {
    if (!value.is_array() || value.size() != 2 || !value[0].is_string())
        fail(where, "expected [element, coeff]");
    WordTerm term;
    term.element = value[0].get<std::string>();
    term.power = 1;
    const auto caret = term.element.find('^');
    if (caret != std::string::npos) {
        const std::string exponent = term.element.substr(caret + 1);
        char* end = nullptr;
        const long p = std::strtol(exponent.c_str(), &end, 10);
        if (exponent.empty() || *end != '\0') fail(where, "bad exponent in '" + term.element + "'");
        term.element.resize(caret);
        term.power = p;
    }
    term.coeff = scalar_at(value[1], where);
    return term;
}

IncidenceWord word_at(const Json& value, const std::string& where) {
    if (!value.is_array()) fail(where, "expected a list of [element, coeff]");
    IncidenceWord word;
    for (std::size_t k = 0; k < value.size(); ++k)
        word.push_back(term_at(value[k], where + "[" + std::to_string(k) + "]"));
    return word;
}

std::vector<Incidence> incidences_at(const Json& value, const std::string& where) {
    if (!value.is_array()) fail(where, "expected an array");
    std::vector<Incidence> out;
    for (std::size_t k = 0; k < value.size(); ++k) {
        const std::string at = where + "[" + std::to_string(k) + "]";
        const Json& rec = value[k];
        out.push_back({text(member(rec, "from", at), at + ".from"), text(member(rec, "to", at), at + ".to"),
                       word_at(member(rec, "word", at), at + ".word")});
    }
    return out;
}

TwistedCellComplex cw_at(const Json& doc, const std::string& where) {
    if (doc.contains("builtin")) {
        const std::string name = text(doc.at("builtin"), where + ".builtin");
        if (name == "circle_integers") return builtin::circle_integers();
        const double parameter = doc.contains("parameter") ? doc.at("parameter").get<double>() : 1.0;
        return builtin::by_name(name, parameter);
    }
    TwistedCellComplex cw;
    const std::string coeffs = doc.contains("coefficients")
                                   ? text(doc.at("coefficients"), where + ".coefficients")
                                   : "unitary";
    if (coeffs == "unitary") {
        cw.kind = CoefficientKind::Unitary;
    } else if (coeffs == "group") {
        cw.kind = CoefficientKind::FiniteGroup;
        cw.context = parse_context(member(doc, "context", where));
    } else if (coeffs == "laurent") {
        cw.kind = CoefficientKind::IntegerLaurent;
    } else {
        fail(where + ".coefficients", "unknown kind '" + coeffs + "'");
    }
    if (doc.contains("fiber_dim"))
        cw.fiber_dim = static_cast<int>(integer(doc.at("fiber_dim"), where + ".fiber_dim"));
    const Json& cells = member(doc, "cells", where);
    if (!cells.is_array()) fail(where + ".cells", "expected a list per degree");
    for (std::size_t q = 0; q < cells.size(); ++q) {
        std::vector<std::string> labels;
        if (!cells[q].is_array()) fail(where + ".cells", "expected a list per degree");
        for (const Json& label : cells[q]) labels.push_back(text(label, where + ".cells"));
        cw.cells.push_back(std::move(labels));
    }
    cw.top_degree = doc.contains("top_degree")
                        ? static_cast<int>(integer(doc.at("top_degree"), where + ".top_degree"))
                        : std::max(0, cw.max_degree());
    if (doc.contains("incidences")) cw.incidences = incidences_at(doc.at("incidences"), where + ".incidences");
    if (doc.contains("representation")) {
        const Json& rep = doc.at("representation");
        if (!rep.is_object()) fail(where + ".representation", "expected an object");
        for (const auto& [name, m] : rep.items())
            cw.representation[name] = matrix_at(m, cw.fiber_dim, cw.fiber_dim,
                                                where + ".representation." + name);
    }
    cw.validate();
    return cw;
}

LaurentPoly poly_at(const Json& value, const std::string& where) {
    if (value.is_string()) return LaurentPoly::parse(value.get<std::string>());
    if (value.is_number()) return LaurentPoly(value.get<double>());
    if (!value.is_array()) fail(where, "expected a string or a list of [exponent, re, im]");
    LaurentPoly p;
    for (const Json& term : value) {
        if (!term.is_array() || term.size() < 2 || term.size() > 3 || !term[0].is_number_integer())
            fail(where, "expected [exponent, re, im]");
        const double im = term.size() == 3 ? term[2].get<double>() : 0.0;
        p += LaurentPoly::monomial(term[0].get<long>(), Complex(term[1].get<double>(), im));
    }
    return p;
}

}  // namespace

Json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError("'" + path + "': " + e.what());
    }
}

std::string kind_of(const Json& doc) { return text(member(doc, "kind", "document"), "kind"); }

Complex parse_scalar(const Json& value) { return scalar_at(value, "scalar"); }

Matrix parse_matrix(const Json& value, Eigen::Index rows, Eigen::Index cols) {
    return matrix_at(value, rows, cols, "matrix");
}

TraceContext parse_context(const Json& value) {
    if (value.is_null() || (value.is_string() && value.get<std::string>() == "C"))
        return TraceContext::complex_field();
    if (!value.is_object()) fail("context", "expected \"C\" or an object");
    if (value.contains("cyclic"))
        return TraceContext::finite_group(
            FiniteGroup::cyclic(static_cast<int>(integer(value.at("cyclic"), "context.cyclic"))));
    if (value.contains("symmetric"))
        return TraceContext::finite_group(
            FiniteGroup::symmetric(static_cast<int>(integer(value.at("symmetric"), "context.symmetric"))));
    const Json& labels = member(value, "labels", "context");
    const Json& table = member(value, "table", "context");
    try {
        return TraceContext::finite_group(FiniteGroup(labels.get<std::vector<std::string>>(),
                                                      table.get<std::vector<std::vector<int>>>()));
    } catch (const Json::exception& e) {
        fail("context", e.what());
    }
}

CochainComplex parse_complex(const Json& doc, const Tolerances& tol) {
    return complex_at(doc, tol, "complex");
}

TwistedCellComplex parse_cw(const Json& doc) { return cw_at(doc, "cw"); }

GluingSpec parse_gluing(const Json& doc) {
    if (doc.contains("builtin")) {
        const std::string name = text(doc.at("builtin"), "gluing.builtin");
        if (name != "circle_from_two_arcs") fail("gluing.builtin", "unknown builtin '" + name + "'");
        return builtin::circle_from_two_arcs(
            doc.contains("holonomy") ? scalar_at(doc.at("holonomy"), "gluing.holonomy") : Complex(-1.0));
    }
    GluingSpec spec;
    spec.lower = cw_at(member(doc, "lower", "gluing"), "gluing.lower");
    spec.upper = cw_at(member(doc, "upper", "gluing"), "gluing.upper");
    if (doc.contains("coupling")) spec.coupling = incidences_at(doc.at("coupling"), "gluing.coupling");
    return spec;
}

ComplexSES parse_ses(const Json& doc, const Tolerances& tol) {
    const CochainComplex sub = complex_at(member(doc, "sub", "ses"), tol, "ses.sub");
    const CochainComplex total = complex_at(member(doc, "total", "ses"), tol, "ses.total");
    const CochainComplex quotient = complex_at(member(doc, "quotient", "ses"), tol, "ses.quotient");
    const int lo = std::min({sub.start_degree(), total.start_degree(), quotient.start_degree()});
    const int hi = std::max({sub.end_degree(), total.end_degree(), quotient.end_degree()});
    const CochainComplex a = sub.padded(lo, hi);
    const CochainComplex b = total.padded(lo, hi);
    const CochainComplex c = quotient.padded(lo, hi);
    auto components = [&](const char* key, const CochainComplex& from, const CochainComplex& to) {
        const Json& list = member(doc, key, "ses");
        const std::size_t n = static_cast<std::size_t>(hi - lo + 1);
        if (!list.is_array() || list.size() != n)
            fail(std::string("ses.") + key, "expected " + std::to_string(n) + " matrices, degrees " +
                                                std::to_string(lo) + ".." + std::to_string(hi));
        std::vector<Morphism> out;
        for (int i = lo; i <= hi; ++i) {
            const HilbertModule src = from.module(i);
            const HilbertModule dst = to.module(i);
            out.emplace_back(src, dst,
                             matrix_at(list[static_cast<std::size_t>(i - lo)], dst.ambient_dim(),
                                       src.ambient_dim(),
                                       std::string("ses.") + key + "[" + std::to_string(i - lo) + "]"));
        }
        return out;
    };
    ComplexMorphism f(a, b, components("f", a, b), tol);
    ComplexMorphism g(b, c, components("g", b, c), tol);
    return {std::move(f), std::move(g), tol};
}

LaurentMatrix parse_laurent(const Json& doc) {
    if (doc.contains("op")) return LaurentMatrix::scalar(poly_at(doc.at("op"), "laurent.op"));
    const Json& rows = member(doc, "matrix", "laurent");
    if (!rows.is_array() || rows.empty() || !rows[0].is_array())
        fail("laurent.matrix", "expected a nonempty list of rows");
    const int n = static_cast<int>(rows.size());
    const int m = static_cast<int>(rows[0].size());
    LaurentMatrix op(n, m);
    for (int r = 0; r < n; ++r) {
        const Json& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != m)
            fail("laurent.matrix", "row " + std::to_string(r) + " needs " + std::to_string(m) + " entries");
        for (int c = 0; c < m; ++c)
            op(r, c) = poly_at(row[static_cast<std::size_t>(c)],
                               "laurent.matrix[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    return op;
}

IncidenceWord parse_word(const Json& value) { return word_at(value, "word"); }

Json number(double value) {
    if (!std::isfinite(value)) return nullptr;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", value);
    const double rounded = std::strtod(buf, nullptr);
    return rounded == 0.0 ? 0.0 : rounded;
}

Json numbers(const std::vector<double>& values) {
    Json out = Json::array();
    for (double v : values) out.push_back(number(v));
    return out;
}

std::string format(double value) {
    if (std::isnan(value)) return "nan";
    if (value == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", value);
    return buf;
}

namespace {

std::string cell(const Json& v) {
    if (v.is_null()) return "-";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format(v.get<double>());
    if (v.is_array()) {
        std::string s;
        for (const Json& x : v) s += (s.empty() ? "" : " ") + cell(x);
        return "[" + s + "]";
    }
    return v.dump();
}

bool is_table(const Json& v) {
    if (!v.is_array() || v.empty()) return false;
    for (const Json& x : v)
        if (!x.is_object()) return false;
    return true;
}

void render(const Json& obj, int indent, std::ostringstream& out) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    for (const auto& [key, v] : obj.items()) {
        if (v.is_object()) {
            out << pad << key << ":\n";
            render(v, indent + 2, out);
        } else if (is_table(v)) {
            out << pad << key << ":\n";
            std::vector<std::string> cols;
            for (const auto& [k, unused] : v[0].items()) cols.push_back(k);
            std::vector<std::size_t> width;
            for (const auto& c : cols) width.push_back(c.size());
            std::vector<std::vector<std::string>> body;
            for (const Json& row : v) {
                std::vector<std::string> line;
                for (std::size_t c = 0; c < cols.size(); ++c) {
                    line.push_back(row.contains(cols[c]) ? cell(row.at(cols[c])) : "");
                    width[c] = std::max(width[c], line.back().size());
                }
                body.push_back(std::move(line));
            }
            auto emit = [&](const std::vector<std::string>& line) {
                out << pad << "  ";
                for (std::size_t c = 0; c < line.size(); ++c) {
                    out << line[c];
                    if (c + 1 < line.size()) out << std::string(width[c] - line[c].size() + 2, ' ');
                }
                out << '\n';
            };
            emit(cols);
            for (const auto& line : body) emit(line);
        } else if (v.is_array()) {
            std::string s;
            for (const Json& x : v) s += (s.empty() ? "" : " ") + cell(x);
            out << pad << key << ":" << (s.empty() ? "" : " ") << s << '\n';
        } else {
            out << pad << key << ": " << cell(v) << '\n';
        }
    }
}

}  // namespace

std::string render_text(const Json& report) {
    std::ostringstream out;
    render(report, 0, out);
    return out.str();
}

}  // namespace torsionlab::io
