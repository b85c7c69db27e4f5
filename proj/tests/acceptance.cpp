// Acceptance run: one PASS/FAIL line per criterion, with its tolerance and
// time budget. Exit status 0 iff every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracles/log_linear.hpp"
#include "support/random_cw.hpp"
#include "support/random_laurent.hpp"
#include "torsionlab/lueck.hpp"

using namespace torsionlab;
using torsionlab::oracles::LogLinear;
using torsionlab::oracles::Rational;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double budget_seconds;
    std::function<Verdict()> run;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

std::string exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

TraceContext small_context(RandomSource& rng) {
    switch (rng.uniform_int(0, 2)) {
        case 0: return TraceContext::complex_field();
        case 1: return TraceContext::finite_group(FiniteGroup::cyclic(2));
        default: return TraceContext::finite_group(FiniteGroup::cyclic(3));
    }
}

TraceContext any_context(RandomSource& rng) {
    if (rng.uniform_int(0, 3) == 3) return TraceContext::finite_group(FiniteGroup::symmetric(3));
    return small_context(rng);
}

CochainComplex random_small_complex(RandomSource& rng, const TraceContext& ctx, int max_length = 4) {
    RandomComplexShape shape;
    shape.start_degree = rng.uniform_int(-1, 1);
    shape.length = rng.uniform_int(1, max_length);
    return random_complex(ctx, shape, rng);
}

std::vector<std::pair<std::string, TwistedCellComplex>> builtins() {
    std::vector<std::pair<std::string, TwistedCellComplex>> out;
    out.emplace_back("point", builtin::point());
    out.emplace_back("interval_tau1", builtin::interval_tau1());
    out.emplace_back("interval_tau2", builtin::interval_tau2());
    for (double angle : {1.0, 0.5, 0.2, 1.0 / 3.0, -0.7})
        out.emplace_back("circle(" + std::to_string(angle) + ")", builtin::circle(testing::unit(angle)));
    for (int m : {1, 2, 3, 5, 8})
        out.emplace_back("circle_cyclic(" + std::to_string(m) + ")", builtin::circle_cyclic(m));
    return out;
}

Verdict criterion_model_values() {
    Verdict v;
    const double t1 = t_comb(builtin::interval_tau1());
    const double t2 = t_comb(builtin::interval_tau2());
    v.ok = t1 == 0.0 && t2 == 0.0;

    const auto tau1 = oracles::interval_tau1();
    const auto tau2 = oracles::interval_tau2();
    v.ok = v.ok && tau1.t_comb.is_zero() && tau2.t_comb.is_zero();

    const LogLinear half_log2 = Rational(1, 2) * oracles::kLog2;
    const Rational euler_point = 1;
    const Rational euler_boundary = 2;
    for (const auto* model : {&tau1, &tau2}) {
        const LogLinear r = model->log_r();
        v.ok = v.ok && r == half_log2 && r == euler_point * oracles::kLog2 * Rational(1, 2) &&
               r == Rational(1, 4) * euler_boundary * oracles::kLog2;
    }
    v.detail = "T_comb(tau1) = " + exact(t1) + ", T_comb(tau2) = " + exact(t2) +
               ", log R(tau1) = " + tau1.log_r().to_string() + ", log R(tau2) = " +
               tau2.log_r().to_string() + "; tol 0";
    return v;
}

Verdict criterion_milnor() {
    RandomSource rng(20241);
    double worst = 0.0;
    int twisted = 0;
    for (int k = 0; k < 100; ++k) {
        const TraceContext ctx = small_context(rng);
        const MilnorReport r = milnor_check(random_bounded_ses(ctx, 4, 6, rng));
        worst = std::max(worst, r.residual / (1.0 + std::abs(r.torsion_total)));
        if (std::abs(r.torsion_long) > 1e-6) ++twisted;
    }
    return {worst < 1e-7, "100 SES (" + std::to_string(twisted) + " with log T(H) != 0), max residual/(1+|T(C2)|) = " +
                              sci(worst) + " < 1e-7"};
}

Verdict criterion_multiplicativity() {
    RandomSource rng(20242);
    double worst_chain = 0.0;
    double worst_block = 0.0;
    for (int k = 0; k < 100; ++k) {
        const TraceContext ctx = any_context(rng);
        const Eigen::Index n = rng.uniform_int(1, 3);
        const HilbertModule w = HilbertModule::free(ctx, n);
        const Morphism f(w, w, random_a_linear_invertible(ctx, n, rng));
        const Morphism g(w, w, random_a_linear_invertible(ctx, n, rng));
        const double scale = 1.0 + std::abs(log_vol(g * f));
        worst_chain = std::max(worst_chain, log_vol_additivity_residual(f, g) / scale);
    }
    for (int k = 0; k < 100; ++k) {
        const TraceContext ctx = any_context(rng);
        const Eigen::Index n1 = rng.uniform_int(1, 3);
        const Eigen::Index n2 = rng.uniform_int(1, 3);
        const HilbertModule w1 = HilbertModule::free(ctx, n1);
        const HilbertModule w2 = HilbertModule::free(ctx, n2);
        const Morphism f(w1, w1, random_a_linear_invertible(ctx, n1, rng));
        const Morphism g(w2, w2, random_a_linear_invertible(ctx, n2, rng));
        const Morphism h(w2, w1, random_a_linear(ctx, n1, n2, rng));
        const double scale = 1.0 + std::abs(log_vol(f)) + std::abs(log_vol(g));
        worst_block = std::max(worst_block, block_triangular_log_vol_residual(f, g, h) / scale);
    }
    return {worst_chain < 1e-9 && worst_block < 1e-9,
            "composition " + sci(worst_chain) + ", block-triangular " + sci(worst_block) + " < 1e-9 relative"};
}

Verdict criterion_routes() {
    double worst = 0.0;
    std::string where;
    auto compare = [&](const CochainComplex& c, const std::string& name) {
        const double a = torsion(c);
        const double b = torsion_via_laplacians(c);
        const double rel = std::abs(a - b) / std::max(1.0, std::abs(a));
        if (rel >= worst) {
            worst = rel;
            where = name;
        }
    };
    for (const auto& [name, cw] : builtins()) compare(build_complex(cw), name);
    for (Complex lambda : {Complex(-1.0, 0.0), Complex(0.0, 1.0), testing::unit(0.2)})
        compare(glue(builtin::circle_from_two_arcs(lambda)).complex, "circle_from_two_arcs");
    RandomSource rng(20244);
    for (int k = 0; k < 100; ++k) compare(random_small_complex(rng, any_context(rng)), "random");
    return {worst < 1e-8, std::to_string(builtins().size() + 3) + " builtins + 100 random, max relative " +
                              sci(worst) + " (" + where + ") < 1e-8"};
}

Verdict criterion_product() {
    RandomSource rng(20245);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const CochainComplex a = random_small_complex(rng, any_context(rng), 3);
        const CochainComplex b = random_small_complex(rng, TraceContext::complex_field(), 3);
        const CochainComplex p = (k % 2 == 0) ? tensor_product(a, b) : tensor_product(b, a);
        const double predicted = b.euler_characteristic() * torsion(a) + a.euler_characteristic() * torsion(b);
        worst = std::max(worst, std::abs(torsion(p) - predicted));
    }
    return {worst < 1e-8, "50 pairs, max residual " + sci(worst) + " < 1e-8"};
}

Verdict criterion_gluing() {
    double worst = 0.0;
    bool lambda_ok = true;
    for (Complex lambda : {Complex(-1.0, 0.0), Complex(0.0, 1.0), testing::unit(0.2)}) {
        const GlueReport r = glue_check(builtin::circle_from_two_arcs(lambda));
        worst = std::max(worst, r.residual);
        lambda_ok = lambda_ok && std::abs(r.t_comb_glued - t_comb(builtin::circle(lambda))) < 1e-12;
    }
    RandomSource rng(20246);
    for (int k = 0; k < 20; ++k) worst = std::max(worst, glue_check(testing::random_gluing(rng)).residual);
    return {worst < 1e-9 && lambda_ok,
            "3 holonomies + 20 random couplings, max residual " + sci(worst) + " < 1e-9"};
}

Verdict criterion_duality() {
    double worst = 0.0;
    std::vector<TwistedCellComplex> cases = {builtin::interval_tau1(), builtin::interval_tau2()};
    for (double angle : {1.0, 0.5, 0.2, -0.7}) cases.push_back(builtin::circle(testing::unit(angle)));
    for (int m : {2, 3, 5}) cases.push_back(builtin::circle_cyclic(m));
    for (const auto& cw : cases) {
        const DualityReport d = duality_check(cw);
        if (d.top_degree != 1) return {false, "top degree " + std::to_string(d.top_degree)};
        worst = std::max({worst, d.torsion_residual, d.intertwining_residual});
    }
    return {worst < 1e-9, std::to_string(cases.size()) + " complexes with d = 1, max residual " + sci(worst) +
                              " < 1e-9"};
}

Verdict criterion_lueck() {
    const LaurentMatrix op = LaurentMatrix::scalar(LaurentPoly::parse("2 - t - t^-1"));
    const ApproxTower tower = build_tower(op, parse_levels("2..4096"));
    double worst = 0.0;
    for (const LevelData& d : tower.data) {
        const double m = d.m;
        worst = std::max(worst, std::abs(d.log_det - 2.0 * std::log(m) / m));
    }
    const double fourier = fourier_log_det(op);
    RandomSource rng(20248);
    int passed = 0;
    for (int k = 0; k < 10; ++k) {
        const LaurentPoly p = testing::random_integer_poly(rng);
        const ApproxTower t = build_tower(LaurentMatrix::scalar(p * p.adjoint()), default_levels());
        if (nonnegativity_check(t).passed) ++passed;
    }
    return {worst < 1e-9 && std::abs(fourier) < 1e-6 && passed == 10,
            "levels 2..4096 max |L_m - 2 log m/m| = " + sci(worst) + " < 1e-9, |fourier| = " +
                sci(std::abs(fourier)) + " < 1e-6, nonnegativity " + std::to_string(passed) + "/10"};
}

Verdict criterion_orientation() {
    RandomSource rng(20249);
    double worst = 0.0;
    for (const auto& [name, cw] : builtins()) {
        const double base = t_comb(cw);
        for (int k = 0; k < 20; ++k) {
            std::map<std::string, int> signs;
            for (const auto& label : cw.all_labels()) signs[label] = rng.uniform_int(0, 1) ? 1 : -1;
            worst = std::max(worst, std::abs(t_comb(reorient(cw, signs)) - base));
        }
    }
    return {worst < 1e-12, "20 sign patterns on each builtin, max change " + sci(worst) + " < 1e-12"};
}

Verdict criterion_mapping_cone() {
    RandomSource rng(20250);
    double worst_delta = 0.0;
    double worst_identity = 0.0;
    for (int k = 0; k < 50; ++k) {
        const TraceContext ctx = any_context(rng);
        RandomComplexShape shape;
        shape.length = rng.uniform_int(1, 3);
        const CochainComplex c1 = random_complex(ctx, shape, rng);
        const CochainComplex c2 = random_complex(ctx, shape, rng);
        const ComplexMorphism f = random_chain_map(c1, c2, rng);
        const MappingCone mc = mapping_cone(f);
        const ComplexSES ses = cone_sequence(mc);
        const HodgeData hs = hodge(mc.suspended);
        const HodgeData h1 = hodge(c1);
        const HodgeData h2 = hodge(c2);
        for (int i = ses.start_degree(); i < ses.end_degree(); ++i) {
            // ℋ_i(SC¹) = ℋ_{i+1}(C¹): compare as operators between ambient spaces.
            const Matrix delta = h2.at(i + 1).harmonic * connecting_hom(ses, i).matrix() * hs.at(i).harmonic.adjoint();
            const Matrix hf = h2.at(i + 1).harmonic * induced_harmonic_map(f, i + 1, h1, h2).matrix() *
                              h1.at(i + 1).harmonic.adjoint();
            const double diff = std::min(operator_norm(delta - hf), operator_norm(delta + hf));
            worst_delta = std::max(worst_delta, diff);
        }
        worst_identity = std::max(worst_identity, std::abs(torsion(mapping_cone(ComplexMorphism::identity(c1)).cone)));
    }
    return {worst_delta < 1e-9 && worst_identity < 1e-10,
            "50 morphisms, max ||delta -+ H(f)|| = " + sci(worst_delta) + " < 1e-9, max |T(cone id)| = " +
                sci(worst_identity) + " < 1e-10"};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "interval model values", 1.0, criterion_model_values},
        {2, "Milnor additivity", 30.0, criterion_milnor},
        {3, "multiplicativity and block-triangularity", 5.0, criterion_multiplicativity},
        {4, "torsion route equivalence", 10.0, criterion_routes},
        {5, "product formula", 10.0, criterion_product},
        {6, "gluing", 5.0, criterion_gluing},
        {7, "Poincare duality", 1.0, criterion_duality},
        {8, "Lueck approximation", 60.0, criterion_lueck},
        {9, "orientation invariance", 2.0, criterion_orientation},
        {10, "mapping cone", 10.0, criterion_mapping_cone},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds < c.budget_seconds;
        const bool pass = v.ok && in_time;
        if (!pass) ++failures;
        std::printf("criterion %2d %s  %s: %s; %.3f s (budget %.0f s%s)\n", c.id, pass ? "PASS" : "FAIL",
                    c.title.c_str(), v.detail.c_str(), seconds, c.budget_seconds, in_time ? "" : ", exceeded");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
