#include "cli.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "io.hpp"
#include "torsionlab/random.hpp"

namespace torsionlab::cli {

namespace {

using io::Json;
using io::number;

Tolerances tolerances(const JobSpec& job, bool validation_override = true) {
    Tolerances tol;
    tol.rank = job.rank_tol;
    if (validation_override && job.tol) tol.validation = *job.tol;
    return tol;
}

const std::string& single_input(const JobSpec& job) {
    if (job.inputs.size() != 1)
        throw ValidationError(job.command + " expects exactly one input file");
    return job.inputs.front();
}

/// Failure of a numerical identity the command checks; the report is still printed.
struct CheckFailure {
    Json report;
    std::string message;
};

struct Loaded {
    CochainComplex complex;
    std::string kind;
    Json extra = Json::object();
};

Loaded load_complex(const std::string& path, const Tolerances& tol) {
    const Json doc = io::load_file(path);
    const std::string kind = io::kind_of(doc);
    if (kind == "complex") return {io::parse_complex(doc, tol), kind};
    if (kind == "cw") {
        const TwistedCellComplex cw = io::parse_cw(doc);
        if (cw.kind == CoefficientKind::IntegerLaurent)
            throw ValidationError("'" + path + "': Laurent coefficients are handled by the lueck command");
        Json extra = Json::object();
        Json cells = Json::array();
        for (int q = 0; q <= cw.max_degree(); ++q) cells.push_back(cw.cell_count(q));
        extra["top_degree"] = cw.top_degree;
        extra["cells"] = cells;
        return {build_complex(cw, tol), kind, extra};
    }
    throw ValidationError("'" + path + "': expected kind complex or cw, got '" + kind + "'");
}

TwistedCellComplex load_cw(const std::string& path) {
    const Json doc = io::load_file(path);
    const std::string kind = io::kind_of(doc);
    if (kind != "cw") throw ValidationError("'" + path + "': expected kind cw, got '" + kind + "'");
    return io::parse_cw(doc);
}

TraceContext pick_context(RandomSource& rng) {
    switch (rng.uniform_int(0, 2)) {
        case 0: return TraceContext::complex_field();
        case 1: return TraceContext::finite_group(FiniteGroup::cyclic(2));
        default: return TraceContext::finite_group(FiniteGroup::cyclic(3));
    }
}

CochainComplex random_small_complex(RandomSource& rng) {
    RandomComplexShape shape;
    shape.start_degree = rng.uniform_int(-1, 1);
    shape.length = rng.uniform_int(1, 4);
    return random_complex(pick_context(rng), shape, rng);
}

double relative(double difference, double scale) { return difference / std::max(1.0, std::abs(scale)); }

Json torsion_summary(const CochainComplex& c, const Tolerances& tol) {
    const HodgeData h = hodge(c, tol);
    Json r;
    r["context"] = c.context().describe();
    r["start_degree"] = c.start_degree();
    r["end_degree"] = c.end_degree();
    Json dims = Json::array();
    Json betti = Json::array();
    Json logdet = Json::array();
    for (int q = c.start_degree(); q <= c.end_degree(); ++q) {
        dims.push_back(number(c.module(q).vn_dim()));
        betti.push_back(number(h.betti(q, c.context())));
        logdet.push_back(number(log_det_prime(laplacian(c, q), tol)));
    }
    r["vn_dims"] = dims;
    r["betti"] = betti;
    r["euler_characteristic"] = number(c.euler_characteristic());
    r["log_det_laplacian"] = logdet;
    const double t = torsion(h, tol);
    const double tl = torsion_via_laplacians(c, tol);
    r["torsion"] = number(t);
    r["torsion_via_laplacians"] = number(tl);
    r["relative_difference"] = number(relative(std::abs(t - tl), t));
    r["rank_ambiguous"] = h.rank_ambiguous;
    return r;
}

Json cmd_torsion(const JobSpec& job) {
    const Tolerances tol = tolerances(job);
    Json r;
    r["command"] = "torsion";
    if (job.random > 0) {
        RandomSource rng(job.seed);
        r["seed"] = job.seed;
        Json rows = Json::array();
        double worst = 0.0;
        for (int k = 0; k < job.random; ++k) {
            const CochainComplex c = random_small_complex(rng);
            const double t = torsion(c, tol);
            const double tl = torsion_via_laplacians(c, tol);
            const double rel = relative(std::abs(t - tl), t);
            worst = std::max(worst, rel);
            rows.push_back({{"index", k}, {"context", c.context().describe()}, {"torsion", number(t)},
                            {"torsion_via_laplacians", number(tl)}, {"relative_difference", number(rel)}});
        }
        r["instances"] = rows;
        r["max_relative_difference"] = number(worst);
        if (worst > 1e-8) throw CheckFailure{r, "torsion routes disagree beyond 1e-8"};
        return r;
    }
    const std::string& path = single_input(job);
    const Loaded in = load_complex(path, tol);
    r["input"] = path;
    r["kind"] = in.kind;
    r.update(in.extra);
    r.update(torsion_summary(in.complex, tol));
    if (r["relative_difference"].get<double>() > 1e-8)
        throw CheckFailure{r, "torsion routes disagree beyond 1e-8"};
    return r;
}

Json cmd_hodge(const JobSpec& job) {
    const Tolerances tol = tolerances(job);
    const std::string& path = single_input(job);
    const Loaded in = load_complex(path, tol);
    const CochainComplex& c = in.complex;
    const HodgeData h = hodge(c, tol);
    Json r;
    r["command"] = "hodge";
    r["input"] = path;
    r["kind"] = in.kind;
    r["context"] = c.context().describe();
    Json rows = Json::array();
    for (int q = c.start_degree(); q <= c.end_degree(); ++q) {
        if (job.degree && *job.degree != q) continue;
        const HodgeDegree& d = h.at(q);
        const std::size_t k = static_cast<std::size_t>(q - c.start_degree());
        const double vol = k < h.reduced.size() ? log_vol(h.reduced[k], tol) : 0.0;
        rows.push_back({{"degree", q},
                        {"ambient_dim", c.module(q).ambient_dim()},
                        {"vn_dim", number(c.module(q).vn_dim())},
                        {"betti", number(h.betti(q, c.context()))},
                        {"harmonic", d.harmonic.cols()},
                        {"plus", d.plus.cols()},
                        {"minus", d.minus.cols()},
                        {"log_vol_reduced", number(vol)}});
    }
    if (job.degree && rows.empty())
        throw ValidationError("degree " + std::to_string(*job.degree) + " is outside " +
                              std::to_string(c.start_degree()) + ".." + std::to_string(c.end_degree()));
    r["degrees"] = rows;
    r["torsion"] = number(torsion(h, tol));
    r["rank_ambiguous"] = h.rank_ambiguous;
    return r;
}

Json milnor_json(const MilnorReport& m) {
    Json r;
    r["torsion_sub"] = number(m.torsion_sub);
    r["torsion_total"] = number(m.torsion_total);
    r["torsion_quotient"] = number(m.torsion_quotient);
    r["torsion_long"] = number(m.torsion_long);
    r["start_degree"] = m.start_degree;
    r["degreewise"] = io::numbers(m.degreewise);
    r["lhs"] = number(m.lhs);
    r["rhs"] = number(m.rhs);
    r["residual"] = number(m.residual);
    return r;
}

Json cmd_ses_check(const JobSpec& job) {
    const Tolerances tol = tolerances(job);
    Json r;
    r["command"] = "ses-check";
    if (job.random > 0) {
        RandomSource rng(job.seed);
        r["seed"] = job.seed;
        Json rows = Json::array();
        double worst = 0.0;
        for (int k = 0; k < job.random; ++k) {
            const TraceContext ctx = pick_context(rng);
            const MilnorReport m = milnor_check(random_bounded_ses(ctx, 4, 6, rng), tol);
            const double rel = m.residual / (1.0 + std::abs(m.torsion_total));
            worst = std::max(worst, rel);
            rows.push_back({{"index", k}, {"context", ctx.describe()}, {"torsion_total", number(m.torsion_total)},
                            {"residual", number(m.residual)}, {"relative_residual", number(rel)}});
        }
        r["instances"] = rows;
        r["max_relative_residual"] = number(worst);
        if (worst > 1e-7) throw CheckFailure{r, "Milnor residual exceeds 1e-7 (1 + |T(C2)|)"};
        return r;
    }
    const std::string& path = single_input(job);
    const Json doc = io::load_file(path);
    if (io::kind_of(doc) != "ses") throw ValidationError("'" + path + "': expected kind ses");
    const MilnorReport m = milnor_check(io::parse_ses(doc, tol), tol);
    r["input"] = path;
    r.update(milnor_json(m));
    const double rel = m.residual / (1.0 + std::abs(m.torsion_total));
    r["relative_residual"] = number(rel);
    if (rel > 1e-7) throw CheckFailure{r, "Milnor residual exceeds 1e-7 (1 + |T(C2)|)"};
    return r;
}

Json cmd_glue_check(const JobSpec& job) {
    const Tolerances tol = tolerances(job);
    const std::string& path = single_input(job);
    const Json doc = io::load_file(path);
    if (io::kind_of(doc) != "gluing") throw ValidationError("'" + path + "': expected kind gluing");
    const GlueReport g = glue_check(io::parse_gluing(doc), tol);
    Json r;
    r["command"] = "glue-check";
    r["input"] = path;
    r["t_comb_glued"] = number(g.t_comb_glued);
    r["t_comb_lower"] = number(g.t_comb_lower);
    r["t_comb_upper"] = number(g.t_comb_upper);
    r["t_long"] = number(g.t_long);
    r["residual"] = number(g.residual);
    r["milnor"] = milnor_json(g.milnor);
    if (g.residual > 1e-9 * (1.0 + std::abs(g.t_comb_glued)))
        throw CheckFailure{r, "gluing residual exceeds 1e-9"};
    return r;
}

Json cmd_duality_check(const JobSpec& job) {
    const Tolerances tol = tolerances(job);
    const std::string& path = single_input(job);
    const DualityReport d = duality_check(load_cw(path), tol);
    Json r;
    r["command"] = "duality-check";
    r["input"] = path;
    r["top_degree"] = d.top_degree;
    r["t_comb"] = number(d.t_comb);
    r["t_comb_dual"] = number(d.t_comb_dual);
    r["torsion_residual"] = number(d.torsion_residual);
    r["intertwining_residual"] = number(d.intertwining_residual);
    if (d.torsion_residual > 1e-9 * (1.0 + std::abs(d.t_comb)) || d.intertwining_residual > 1e-9)
        throw CheckFailure{r, "duality residual exceeds 1e-9"};
    return r;
}

Json product_row(const CochainComplex& a, const CochainComplex& b, const Tolerances& tol) {
    const double ta = torsion(a, tol);
    const double tb = torsion(b, tol);
    const double xa = a.euler_characteristic();
    const double xb = b.euler_characteristic();
    const CochainComplex p = tensor_product(a, b, tol);
    const double tp = torsion(p, tol);
    const double predicted = xb * ta + xa * tb;
    Json r;
    r["torsion_first"] = number(ta);
    r["torsion_second"] = number(tb);
    r["euler_first"] = number(xa);
    r["euler_second"] = number(xb);
    r["torsion_product"] = number(tp);
    r["torsion_product_via_laplacians"] = number(torsion_via_laplacians(p, tol));
    r["predicted"] = number(predicted);
    r["residual"] = number(std::abs(tp - predicted));
    return r;
}

Json cmd_product(const JobSpec& job) {
    const Tolerances tol = tolerances(job);
    Json r;
    r["command"] = "product";
    if (job.random > 0) {
        RandomSource rng(job.seed);
        r["seed"] = job.seed;
        Json rows = Json::array();
        double worst = 0.0;
        for (int k = 0; k < job.random; ++k) {
            RandomComplexShape shape;
            shape.start_degree = rng.uniform_int(-1, 1);
            shape.length = rng.uniform_int(1, 3);
            const CochainComplex a = random_complex(pick_context(rng), shape, rng);
            shape.start_degree = rng.uniform_int(-1, 1);
            shape.length = rng.uniform_int(1, 3);
            const CochainComplex b = random_complex(TraceContext::complex_field(), shape, rng);
            Json row = product_row(a, b, tol);
            worst = std::max(worst, row["residual"].get<double>());
            Json indexed = {{"index", k}};
            indexed.update(row);
            rows.push_back(indexed);
        }
        r["instances"] = rows;
        r["max_residual"] = number(worst);
        if (worst > 1e-8) throw CheckFailure{r, "product formula residual exceeds 1e-8"};
        return r;
    }
    if (job.inputs.size() != 2) throw ValidationError("product expects two input files");
    r["inputs"] = job.inputs;
    r.update(product_row(load_complex(job.inputs[0], tol).complex, load_complex(job.inputs[1], tol).complex, tol));
    if (r["residual"].get<double>() > 1e-8 * (1.0 + std::abs(r["torsion_product"].get<double>())))
        throw CheckFailure{r, "product formula residual exceeds 1e-8"};
    return r;
}

Json describe_operator(const LaurentMatrix& op) {
    if (op.rows() == 1 && op.cols() == 1) return op(0, 0).to_string();
    Json rows = Json::array();
    for (int i = 0; i < op.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < op.cols(); ++j) row.push_back(op(i, j).to_string());
        rows.push_back(row);
    }
    return rows;
}

Json cmd_lueck(const JobSpec& job) {
    const Tolerances tol = tolerances(job, false);
    const double check_tol = job.tol.value_or(1e-6);
    LaurentMatrix op;
    Json r;
    r["command"] = "lueck";
    if (job.op) {
        if (!job.inputs.empty()) throw ValidationError("lueck takes either --op or an input file");
        op = LaurentMatrix::scalar(LaurentPoly::parse(*job.op));
    } else {
        const std::string& path = single_input(job);
        const Json doc = io::load_file(path);
        const std::string kind = io::kind_of(doc);
        r["input"] = path;
        if (kind == "laurent") {
            op = io::parse_laurent(doc);
        } else if (kind == "cw") {
            const int q = job.degree.value_or(0);
            op = laurent_laplacian(io::parse_cw(doc), q);
            r["laplacian_degree"] = q;
        } else {
            throw ValidationError("'" + path + "': expected kind laurent or cw, got '" + kind + "'");
        }
    }
    const ApproxTower tower = build_tower(op, parse_levels(job.levels), tol);
    const QuadratureResult fourier = fourier_log_det_detailed(op);
    r["operator"] = describe_operator(op);
    r["size"] = op.rows();
    r["gershgorin_bound"] = number(tower.b);
    Json rows = Json::array();
    for (const LevelData& d : tower.data)
        rows.push_back({{"m", d.m},
                        {"level_log_det", number(d.log_det)},
                        {"by_parts", number(d.log_det_by_parts)},
                        {"smallest_nonzero", number(d.smallest_nonzero)},
                        {"largest", number(d.largest)},
                        {"kernel", number(d.kernel)}});
    r["levels"] = rows;
    r["fourier_log_det"] = number(fourier.value);
    r["fourier_error"] = number(fourier.error);
    r["fourier_intervals"] = fourier.intervals;
    r["kernel_limit"] = number(limit_distribution(op, 0.0));

    const SemicontinuityReport s = semicontinuity_check(tower, check_tol);
    r["semicontinuity"] = {{"tolerance", number(check_tol)},
                           {"liminf_log_det", number(s.liminf_log_det)},
                           {"oracle_integral", number(s.oracle_integral)},
                           {"level_integrals", io::numbers(s.level_integrals)},
                           {"log_det_bound", s.log_det_bound},
                           {"integral_bound", s.integral_bound}};
    Json nn;
    if (op.has_integer_coefficients()) {
        const NonnegativityReport n = nonnegativity_check(tower, check_tol);
        nn["checked"] = true;
        nn["passed"] = n.passed;
        nn["integrality_checked"] = n.integrality_checked;
        nn["integer_residual"] = io::numbers(n.integer_residual);
        nn["violations"] = n.violations;
    } else {
        nn["checked"] = false;
        nn["reason"] = "non-integer coefficients";
    }
    r["nonnegativity"] = nn;
    return r;
}

const std::map<std::string, std::function<Json(const JobSpec&)>>& table() {
    static const std::map<std::string, std::function<Json(const JobSpec&)>> t = {
        {"torsion", cmd_torsion},         {"hodge", cmd_hodge},
        {"glue-check", cmd_glue_check},   {"ses-check", cmd_ses_check},
        {"lueck", cmd_lueck},             {"duality-check", cmd_duality_check},
        {"product", cmd_product},
    };
    return t;
}

std::string emit(const Json& report, bool json) {
    return json ? report.dump(2) + "\n" : io::render_text(report);
}

}  // namespace

const std::vector<std::string>& commands() {
    static const std::vector<std::string> names = {"torsion", "hodge",         "glue-check", "ses-check",
                                                   "lueck",   "duality-check", "product"};
    return names;
}

Outcome run(const JobSpec& job) {
    Outcome o;
    const auto it = table().find(job.command);
    if (it == table().end()) {
        o.exit_code = 2;
        o.err = "unknown command '" + job.command + "'\n";
        return o;
    }
    try {
        o.out = emit(it->second(job), job.json);
    } catch (const CheckFailure& f) {
        o.exit_code = 1;
        o.out = emit(f.report, job.json);
        o.err = "check failed: " + f.message + "\n";
    } catch (const ValidationError& e) {
        o.exit_code = 2;
        o.err = std::string("validation error: ") + e.what() + "\n";
    } catch (const Json::exception& e) {
        o.exit_code = 2;
        o.err = std::string("validation error: ") + e.what() + "\n";
    } catch (const NumericalError& e) {
        o.exit_code = 1;
        o.err = std::string("numerical error: ") + e.what() + "\n";
    } catch (const std::exception& e) {
        o.exit_code = 1;
        o.err = std::string("internal error: ") + e.what() + "\n";
    }
    return o;
}

}  // namespace torsionlab::cli
