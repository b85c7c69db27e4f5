#include "doctest.h"

#include <cmath>
#include <numbers>

#include "torsionlab/complexes.hpp"
#include "torsionlab/random.hpp"

using namespace torsionlab;

namespace {

const TraceContext kC = TraceContext::complex_field();

Matrix scalar(Complex c) { return Matrix::Constant(1, 1, c); }

CochainComplex circle(Complex lambda) {
    const HilbertModule w = HilbertModule::free(kC, 1);
    return CochainComplex({w, w}, {Morphism(w, w, scalar(lambda - 1.0))});
}

CochainComplex three_term(double a, double b) {
    const HilbertModule c1 = HilbertModule::free(kC, 1), c2 = HilbertModule::free(kC, 2);
    Matrix d0 = Matrix::Zero(2, 1), d1 = Matrix::Zero(1, 2);
    d0(0, 0) = a;
    d1(0, 1) = b;
    return CochainComplex({c1, c2, c1}, {Morphism(c1, c2, d0), Morphism(c2, c1, d1)});
}

TraceContext pick_context(RandomSource& rng) {
    switch (rng.uniform_int(0, 3)) {
        case 0: return kC;
        case 1: return TraceContext::finite_group(FiniteGroup::cyclic(2));
        case 2: return TraceContext::finite_group(FiniteGroup::cyclic(3));
        default: return TraceContext::finite_group(FiniteGroup::symmetric(3));
    }
}

CochainComplex small_random(RandomSource& rng, const TraceContext& ctx, int start, int length) {
    RandomComplexShape shape;
    shape.start_degree = start;
    shape.length = length;
    return random_complex(ctx, shape, rng);
}

double scale_of(double a, double b = 0.0, double c = 0.0) {
    return 1.0 + std::abs(a) + std::abs(b) + std::abs(c);
}

}  // namespace

TEST_CASE("construction rejects d o d != 0 and shape errors") {
    const HilbertModule w = HilbertModule::free(kC, 1);
    const Morphism one(w, w, scalar(1.0));
    CHECK_THROWS_AS(CochainComplex({w, w, w}, {one, one}), ValidationError);
    CHECK_THROWS_AS(CochainComplex({w, w}, {}), ValidationError);
    const HilbertModule w2 = HilbertModule::free(kC, 2);
    CHECK_THROWS_AS(CochainComplex({w, w2}, {one}), ValidationError);
}

TEST_CASE("hodge examples") {
    const HilbertModule w = HilbertModule::free(kC, 1);
    const HodgeData point = hodge(CochainComplex::concentrated(w, 0));
    CHECK(point.at(0).harmonic.cols() == 1);
    CHECK(point.at(0).plus.cols() == 0);
    CHECK(point.at(0).minus.cols() == 0);

    const HodgeData exact = hodge(three_term(1.0, 1.0));
    for (int q = 0; q < 3; ++q) CHECK(exact.at(q).harmonic.cols() == 0);
    REQUIRE(exact.at(1).plus.cols() == 1);
    REQUIRE(exact.at(1).minus.cols() == 1);
    CHECK(std::abs(std::abs(exact.at(1).plus(0, 0)) - 1.0) < 1e-14);
    CHECK(std::abs(std::abs(exact.at(1).minus(1, 0)) - 1.0) < 1e-14);

    const Complex i(0.0, 1.0);
    const HodgeData circ = hodge(circle(i));
    CHECK(circ.at(0).harmonic.cols() == 0);
    CHECK(circ.at(1).harmonic.cols() == 0);
    REQUIRE(circ.reduced[0].matrix().size() == 1);
    CHECK(std::abs(std::abs(circ.reduced[0].matrix()(0, 0)) - std::abs(i - 1.0)) < 1e-14);
    CHECK(log_vol(circ.reduced[0]) == doctest::Approx(std::log(std::abs(i - 1.0))));
}

TEST_CASE("hodge bases are orthonormal, complete, and reduced maps invertible") {
    RandomSource rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        const TraceContext ctx = pick_context(rng);
        const CochainComplex c = small_random(rng, ctx, rng.uniform_int(-2, 2), rng.uniform_int(1, 4));
        const HodgeData h = hodge(c);
        CHECK_FALSE(h.rank_ambiguous);
        double euler_h = 0.0;
        for (int q = c.start_degree(); q <= c.end_degree(); ++q) {
            const HodgeDegree& d = h.at(q);
            Matrix all(c.module(q).ambient_dim(), d.harmonic.cols() + d.plus.cols() + d.minus.cols());
            all << d.harmonic, d.plus, d.minus;
            REQUIRE(all.cols() == c.module(q).ambient_dim());
            CHECK((all.adjoint() * all - Matrix::Identity(all.cols(), all.cols())).norm() < 1e-10);
            CHECK((c.differential(q).matrix() * d.harmonic).norm() < 1e-9 * (1.0 + c.differential(q).matrix().norm()));
            CHECK((c.differential(q - 1).matrix().adjoint() * d.harmonic).norm() <
                  1e-9 * (1.0 + c.differential(q - 1).matrix().norm()));
            euler_h += ((q % 2 == 0) ? 1.0 : -1.0) * h.betti(q, ctx);
        }
        for (const Morphism& r : h.reduced)
            CHECK(numerical_rank(r.matrix()) == r.matrix().rows());
        CHECK(euler_h == doctest::Approx(c.euler_characteristic()));
    }
}

TEST_CASE("torsion examples") {
    const HilbertModule w = HilbertModule::free(kC, 2);
    const Morphism zero = Morphism::zero(w, w);
    CHECK(torsion(CochainComplex({w, w, w}, {zero, zero})) == 0.0);
    CHECK(torsion_via_laplacians(CochainComplex({w, w, w}, {zero, zero})) == 0.0);

    CHECK(torsion(three_term(3.0, 5.0)) == doctest::Approx(std::log(3.0) - std::log(5.0)));
    CHECK(torsion_via_laplacians(three_term(3.0, 5.0)) ==
          doctest::Approx(std::log(3.0) - std::log(5.0)));
    CHECK(torsion(circle(-1.0)) == doctest::Approx(std::log(2.0)));
    CHECK(torsion_via_laplacians(circle(-1.0)) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("laplacians and log det'") {
    const HilbertModule w = HilbertModule::free(kC, 3);
    const Morphism zero = Morphism::zero(w, w);
    CHECK(laplacian(CochainComplex({w, w}, {zero}), 0).matrix().norm() == 0.0);
    CHECK((laplacian(circle(-1.0), 0).matrix() - scalar(4.0)).norm() < 1e-14);
    CHECK((laplacian(circle(-1.0), 1).matrix() - scalar(4.0)).norm() < 1e-14);
    CHECK(laplacian(CochainComplex::concentrated(HilbertModule::free(kC, 1), 0), 0).matrix().norm() == 0.0);
    CHECK_THROWS_AS((void)laplacian(circle(-1.0), 5), ValidationError);

    CHECK(log_det_prime(Morphism::identity(w)) == 0.0);
    Matrix d = Matrix::Zero(2, 2);
    d(1, 1) = 4.0;
    const HilbertModule w2 = HilbertModule::free(kC, 2);
    CHECK(log_det_prime(Morphism(w2, w2, d)) == doctest::Approx(std::log(4.0)));
    Matrix skew = Matrix::Zero(2, 2);
    skew(0, 1) = 1.0;
    CHECK_THROWS_AS((void)log_det_prime(Morphism(w2, w2, skew)), ValidationError);

    for (int m = 2; m <= 64; ++m) {
        const TraceContext ctx = TraceContext::finite_group(FiniteGroup::cyclic(m));
        const Morphism lap = group_ring_matrix({{"e", 2.0}, {"t", -1.0}, {"t^-1", -1.0}}, ctx, 1);
        double product = 1.0;
        for (int k = 1; k < m; ++k) product *= 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k / m);
        CHECK(log_det_prime(lap) == doctest::Approx(std::log(product) / m).epsilon(1e-10));
        CHECK(std::log(product) / m == doctest::Approx(2.0 * std::log(m) / m).epsilon(1e-12));
    }
}

TEST_CASE("torsion equals the Laplacian route on random complexes") {
    RandomSource rng(4242);
    for (int trial = 0; trial < 100; ++trial) {
        const TraceContext ctx = pick_context(rng);
        const CochainComplex c = small_random(rng, ctx, rng.uniform_int(-3, 3), rng.uniform_int(1, 5));
        const double a = torsion(c), b = torsion_via_laplacians(c);
        CHECK(std::abs(a - b) < 1e-8 * scale_of(a));
    }
}

TEST_CASE("torsion is invariant under unitary change of basis") {
    RandomSource rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const CochainComplex c = small_random(rng, kC, 0, 4);
        std::vector<Matrix> unitaries;
        for (const HilbertModule& m : c.modules()) {
            Matrix a(m.ambient_dim(), m.ambient_dim());
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.complex_normal();
            unitaries.push_back(a.rows() ? Matrix(a.householderQr().householderQ()) : a);
        }
        const double t = torsion(c);
        CHECK(std::abs(torsion(c.conjugated(unitaries)) - t) < 1e-9 * scale_of(t));
    }
}

TEST_CASE("suspension negates torsion") {
    RandomSource rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const TraceContext ctx = pick_context(rng);
        const CochainComplex c = small_random(rng, ctx, rng.uniform_int(-2, 2), rng.uniform_int(1, 4));
        const CochainComplex s = suspension(c);
        CHECK(s.start_degree() == c.start_degree() - 1);
        const HodgeData hc = hodge(c), hs = hodge(s);
        double alt_c = 0.0, alt_s = 0.0;
        for (std::size_t j = 0; j < hc.reduced.size(); ++j) {
            const double sign = (j % 2 == 0) ? 1.0 : -1.0;
            alt_c += sign * log_vol(hc.reduced[j]);
            alt_s += sign * log_vol(hs.reduced[j]);
        }
        CHECK(std::abs(alt_s - alt_c) < 1e-10 * scale_of(alt_c));  // sign-free relative sums
        CHECK(std::abs(torsion(s) + torsion(c)) < 1e-9 * scale_of(torsion(c)));
        CHECK(s.euler_characteristic() == doctest::Approx(-c.euler_characteristic()));
    }
}

TEST_CASE("tensor products") {
    const CochainComplex unit = CochainComplex::concentrated(HilbertModule::free(kC, 1), 0);
    RandomSource rng(31);
    const CochainComplex c = small_random(rng, TraceContext::finite_group(FiniteGroup::cyclic(3)), 0, 3);
    const CochainComplex cu = tensor_product(c, unit);
    CHECK(cu.length() == c.length());
    CHECK(torsion(cu) == doctest::Approx(torsion(c)).epsilon(1e-10));

    const CochainComplex point = CochainComplex::concentrated(HilbertModule::free(kC, 1), 0);
    const CochainComplex p = tensor_product(circle(-1.0), point);
    CHECK(torsion(p) == doctest::Approx(std::log(2.0)));
    CHECK(torsion_via_laplacians(p) == doctest::Approx(std::log(2.0)));

    const TraceContext z2 = TraceContext::finite_group(FiniteGroup::cyclic(2));
    CHECK_THROWS_AS((void)tensor_product(small_random(rng, z2, 0, 2), small_random(rng, z2, 0, 2)),
                    ValidationError);

    for (int trial = 0; trial < 60; ++trial) {
        RandomComplexShape shape;
        shape.start_degree = rng.uniform_int(-2, 2);
        shape.length = rng.uniform_int(1, 3);
        shape.max_pairs = 1;
        const CochainComplex a = random_complex(pick_context(rng), shape, rng);
        shape.start_degree = rng.uniform_int(-2, 2);
        shape.length = rng.uniform_int(1, 3);
        const CochainComplex b = random_complex(kC, shape, rng);
        const CochainComplex ab = (trial % 2 == 0) ? tensor_product(a, b) : tensor_product(b, a);
        const double expected =
            b.euler_characteristic() * torsion(a) + a.euler_characteristic() * torsion(b);
        CHECK(std::abs(torsion(ab) - expected) < 1e-8 * scale_of(torsion(a), torsion(b)));
        CHECK(ab.euler_characteristic() ==
              doctest::Approx(a.euler_characteristic() * b.euler_characteristic()));
    }
}

TEST_CASE("mapping cones") {
    RandomSource rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const TraceContext ctx = pick_context(rng);
        const CochainComplex c = small_random(rng, ctx, rng.uniform_int(-1, 1), rng.uniform_int(1, 4));
        const MappingCone id_cone = mapping_cone(ComplexMorphism::identity(c));
        const HodgeData h = hodge(id_cone.cone);
        for (const HodgeDegree& d : h.degrees) CHECK(d.harmonic.cols() == 0);
        CHECK(std::abs(torsion(id_cone.cone)) < 1e-9);

        // f = 0: cone = C² ⊕ SC¹, Betti numbers add.
        const CochainComplex c2 = small_random(rng, ctx, c.start_degree(), c.length());
        std::vector<Morphism> zeros;
        for (int q = c.start_degree(); q <= c.end_degree(); ++q)
            zeros.push_back(Morphism::zero(c.module(q), c2.module(q)));
        const MappingCone zc = mapping_cone(ComplexMorphism(c, c2, zeros));
        const HodgeData hz = hodge(zc.cone), h1 = hodge(c), h2 = hodge(c2);
        for (int q = zc.cone.start_degree(); q <= zc.cone.end_degree(); ++q)
            CHECK(hz.betti(q, ctx) == doctest::Approx(h2.betti(q, ctx) + h1.betti(q + 1, ctx)));
        CHECK(torsion(zc.cone) == doctest::Approx(torsion(c2) - torsion(c)).epsilon(1e-9));

        // Degreewise exactness of 0 → C² → C(f) → SC¹ → 0.
        const ComplexMorphism f = random_chain_map(c, c2, rng);
        const MappingCone mc = mapping_cone(f);
        for (int q = mc.cone.start_degree(); q <= mc.cone.end_degree(); ++q) {
            const Matrix& j = mc.inclusion.component(q).matrix();
            const Matrix& p = mc.projection.component(q).matrix();
            CHECK((p * j).norm() < 1e-12);
            CHECK(numerical_rank(j) + numerical_rank(p) == mc.cone.module(q).ambient_dim());
        }
    }
}

TEST_CASE("induced harmonic maps") {
    RandomSource rng(5150);
    const CochainComplex exact = three_term(2.0, 3.0);
    for (int q = 0; q < 3; ++q) {
        const Morphism h = induced_harmonic_map(ComplexMorphism::identity(exact), q);
        CHECK(h.matrix().size() == 0);
    }
    for (int trial = 0; trial < 30; ++trial) {
        const TraceContext ctx = pick_context(rng);
        const CochainComplex c = small_random(rng, ctx, 0, 3);
        const HodgeData h = hodge(c);
        for (int q = 0; q < 3; ++q) {
            const Morphism id = induced_harmonic_map(ComplexMorphism::identity(c), q);
            const Eigen::Index n = h.at(q).harmonic.cols();
            CHECK((id.matrix() - Matrix::Identity(n, n)).norm() < 1e-10);
        }
        // A chain isomorphism is a quasi-isomorphism: H(f_i) invertible.
        const ComplexMorphism iso = random_chain_isomorphism(c, rng);
        for (int q = 0; q < 3; ++q) {
            const Matrix m = induced_harmonic_map(iso, q).matrix();
            CHECK(m.rows() == m.cols());
            CHECK(numerical_rank(m) == m.rows());
        }
    }
}

TEST_CASE("torsion transfer along invertible chain maps") {
    const CochainComplex exact = three_term(2.0, 3.0);
    CHECK(torsion_transfer_residual(ComplexMorphism::identity(exact)) < 1e-14);
    std::vector<Morphism> scaled;
    for (int q = 0; q < 3; ++q) scaled.push_back(Morphism::identity(exact.module(q)).scaled(7.5));
    CHECK(torsion_transfer_residual(ComplexMorphism(exact, exact, scaled)) < 1e-12);

    RandomSource rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        const TraceContext ctx = pick_context(rng);
        RandomComplexShape shape;
        shape.length = rng.uniform_int(1, 4);
        shape.start_degree = rng.uniform_int(-1, 1);
        shape.max_pairs = 1;
        const CochainComplex c = random_complex(ctx, shape, rng);
        const ComplexMorphism f = random_chain_isomorphism(c, rng);
        double scale = 1.0 + std::abs(torsion(c)) + std::abs(torsion(f.target()));
        for (const Morphism& fi : f.components()) scale += std::abs(log_vol(fi));
        CHECK(torsion_transfer_residual(f) < 1e-8 * scale);
    }
    const CochainComplex w = circle(-1.0);
    std::vector<Morphism> singular{Morphism::zero(w.module(0), w.module(0)),
                                   Morphism::zero(w.module(1), w.module(1))};
    CHECK_THROWS_AS((void)torsion_transfer_residual(ComplexMorphism(w, w, singular)), ValidationError);
}
