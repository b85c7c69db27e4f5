#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "torsionlab/lueck.hpp"
#include "torsionlab/random.hpp"
#include "support/random_laurent.hpp"

using namespace torsionlab;

namespace {

LaurentMatrix scalar_op(const char* text) { return LaurentMatrix::scalar(LaurentPoly::parse(text)); }

using torsionlab::testing::random_integer_poly;

// log Mahler measure from the roots of the coefficient polynomial.
double log_mahler_by_roots(const LaurentPoly& p) {
    const long lo = p.min_exponent(), hi = p.max_exponent();
    const long degree = hi - lo;
    const Complex lead = p.coeff(hi);
    double value = std::log(std::abs(lead));
    if (degree == 0) return value;
    Matrix companion = Matrix::Zero(degree, degree);
    for (long k = 0; k < degree; ++k) companion(0, k) = -p.coeff(hi - 1 - k) / lead;
    for (long k = 1; k < degree; ++k) companion(k, k - 1) = 1.0;
    const Eigen::VectorXcd roots = Eigen::ComplexEigenSolver<Matrix>(companion).eigenvalues();
    for (Eigen::Index k = 0; k < roots.size(); ++k) value += std::log(std::max(1.0, std::abs(roots(k))));
    return value;
}

}  // namespace

TEST_CASE("Laurent polynomials") {
    const LaurentPoly lap = LaurentPoly::parse("2 - t - t^-1");
    CHECK(lap.coeff(0) == Complex(2.0, 0.0));
    CHECK(lap.coeff(1) == Complex(-1.0, 0.0));
    CHECK(lap.coeff(-1) == Complex(-1.0, 0.0));
    const LaurentPoly one_minus_t = LaurentPoly::parse("1 - t");
    CHECK(one_minus_t.adjoint() * one_minus_t == lap);
    CHECK(LaurentPoly::parse("(1 - t)(1 - t^-1)") == lap);
    CHECK(LaurentPoly::parse("(1-t)^2 * t^(-1)") == LaurentPoly::parse("t^-1 - 2 + t"));
    CHECK(LaurentPoly::parse("2i t^3").coeff(3) == Complex(0.0, 2.0));
    CHECK(LaurentPoly::parse(lap.to_string()) == lap);
    CHECK(LaurentPoly::parse("0.5 + 3t^2 - 1.25t^-4").to_string() == "-1.25t^-4 + 0.5 + 3t^2");
    CHECK(LaurentPoly::parse("t - t").is_zero());
    for (const char* bad : {"", "2 +", "t^x", "(1 - t", "(1 + t)^-1", "2 $ t"})
        CHECK_THROWS_AS((void)LaurentPoly::parse(bad), ValidationError);

    CHECK(lap.evaluate(Complex(-1.0, 0.0)) == Complex(4.0, 0.0));
    CHECK(lap.coefficient_l1() == 4.0);
    CHECK(lap.has_integer_coefficients());
    CHECK_FALSE(LaurentPoly::parse("0.5t").has_integer_coefficients());
}

TEST_CASE("Laurent matrices") {
    RandomSource rng(3);
    LaurentMatrix a(2, 3);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c) a(r, c) = random_integer_poly(rng);
    const LaurentMatrix gram = a.adjoint() * a;
    CHECK(gram.rows() == 3);
    CHECK(gram.is_selfadjoint());
    CHECK_FALSE(a.is_selfadjoint());
    CHECK(gram.has_integer_coefficients());
    // Symbol is a ring map: symbol(A* A) = symbol(A)* symbol(A).
    for (double theta : {0.0, 0.1, 0.37, 0.5}) {
        const Matrix lhs = gram.symbol(theta);
        const Matrix rhs = a.symbol(theta).adjoint() * a.symbol(theta);
        CHECK((lhs - rhs).norm() < 1e-12);
    }
    CHECK(LaurentMatrix::identity(3).gershgorin_bound() == 1.0);
    CHECK(scalar_op("2 - t - t^-1").gershgorin_bound() == 4.0);
    CHECK_THROWS_AS((void)(a * a), ValidationError);
}

TEST_CASE("specialization") {
    const Morphism s = specialize(scalar_op("2 - t - t^-1"), 4);
    CHECK(s.matrix().rows() == 4);
    const double first_row[4] = {2.0, -1.0, 0.0, -1.0};
    for (int k = 0; k < 4; ++k) CHECK(s.matrix()(0, k) == Complex(first_row[k], 0.0));
    CHECK(s.matrix().isApprox(s.matrix().adjoint()));
    for (int m : {1, 3, 7})
        CHECK((specialize(LaurentMatrix::identity(2), m).matrix() - Matrix::Identity(2 * m, 2 * m)).norm() == 0.0);

    // Same convention as group-ring words over Z/m.
    const TwistedCellComplex circle = builtin::circle_integers();
    const LaurentMatrix d = laurent_coboundary(circle, 0);
    for (int m : {2, 5, 8}) {
        const Matrix direct = build_complex(builtin::circle_cyclic(m)).differential(0).matrix();
        CHECK((specialize(d, m).matrix() - direct).norm() < 1e-15);
    }
    CHECK(laurent_laplacian(circle, 0) == scalar_op("2 - t - t^-1"));
    CHECK(laurent_laplacian(circle, 1) == scalar_op("2 - t - t^-1"));
}

TEST_CASE("level eigenvalues by characters match the dense specialization") {
    RandomSource rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = rng.uniform_int(1, 3);
        LaurentMatrix a(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) a(r, c) = random_integer_poly(rng);
        const LaurentMatrix op = a.adjoint() * a;
        for (int m : {1, 2, 6, 16, 25}) {
            const RealVector fast = level_eigenvalues(op, m);
            const RealVector dense = hermitian_eigenvalues(specialize(op, m).matrix());
            CHECK((fast - dense).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, dense.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("level log determinants") {
    const LaurentMatrix lap = scalar_op("2 - t - t^-1");
    // Eigenvalues {0, 2, 4, 2}.
    CHECK(std::abs(level_log_det(lap, 4) - std::log(2.0)) < 1e-14);
    CHECK(level_log_det(LaurentMatrix::identity(3), 16) == 0.0);
    // Oracle: Π_{k≠0} (2 − 2cos(2πk/m)) = m².
    double previous = std::numeric_limits<double>::infinity();
    for (int m : default_levels()) {
        const LevelData level = level_data(lap, m);
        const double oracle = 2.0 * std::log(static_cast<double>(m)) / m;
        CHECK(std::abs(level.log_det - oracle) < 1e-9);
        CHECK(std::abs(level.log_det_by_parts - level.log_det) < 1e-9);
        CHECK(level.distribution.total == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(level.kernel == doctest::Approx(1.0 / m));
        CHECK(level.largest <= 4.0 + 1e-12);
        if (m >= 8) CHECK(level.log_det < previous);  // levels 2 and 4 coincide
        previous = level.log_det;
    }
    const LaurentMatrix negative = scalar_op("-2 + t + t^-1");
    CHECK_THROWS_AS((void)level_log_det(negative, 8), ValidationError);
    CHECK_THROWS_AS((void)level_log_det(scalar_op("t"), 8), ValidationError);
}

TEST_CASE("cyclic torsion from the Laurent Laplacian") {
    // T(circle over Z/m) = ½ (1/m) log det' Δ_1.
    const LaurentMatrix lap1 = laurent_laplacian(builtin::circle_integers(), 1);
    for (int m : {2, 3, 8, 12})
        CHECK(std::abs(0.5 * level_log_det(lap1, m) - t_comb(builtin::circle_cyclic(m))) < 1e-12);
}

TEST_CASE("towers") {
    CHECK(parse_levels("2..4096") == default_levels());
    CHECK(parse_levels("3..24") == std::vector<int>{3, 6, 12, 24});
    CHECK(parse_levels("2,6,12") == std::vector<int>{2, 6, 12});
    CHECK_THROWS_AS((void)parse_levels("8..2"), ValidationError);
    CHECK_THROWS_AS((void)parse_levels("2,x"), ValidationError);

    const LaurentMatrix lap = scalar_op("2 - t - t^-1");
    CHECK_THROWS_AS((void)build_tower(lap, {2, 6, 9}), ValidationError);
    CHECK_THROWS_AS((void)build_tower(scalar_op("1 + t"), {2, 4}), ValidationError);

    setenv("TORSIONLAB_THREADS", "1", 1);
    CHECK(worker_threads() == 1);
    const ApproxTower serial = build_tower(lap, default_levels());
    unsetenv("TORSIONLAB_THREADS");
    const ApproxTower parallel = build_tower(lap, default_levels());
    REQUIRE(serial.data.size() == parallel.data.size());
    for (std::size_t k = 0; k < serial.data.size(); ++k) {
        CHECK(serial.data[k].m == parallel.data[k].m);
        CHECK(serial.data[k].log_det == parallel.data[k].log_det);
    }
    CHECK(serial.b == 4.0);
    for (const auto& level : serial.data) CHECK(level.largest <= serial.b);
}

TEST_CASE("Fourier log determinant") {
    CHECK(std::abs(fourier_log_det(scalar_op("2 - t - t^-1"))) < 1e-8);
    CHECK(std::abs(fourier_log_det(scalar_op("3")) - std::log(3.0)) < 1e-14);
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    CHECK(std::abs(fourier_log_det(scalar_op("3 - t - t^-1")) - 2.0 * std::log(golden)) < 1e-10);
    // Zeros away from θ = 0 sit on the long double roundoff floor of the symbol.
    CHECK(std::abs(fourier_log_det(scalar_op("(1 + t)(1 + t^-1)"))) < 3e-8);
    CHECK(std::abs(fourier_log_det(scalar_op("(1 - t^3)(1 - t^-3)"))) < 3e-8);

    // Blocks add; an identically zero branch is skipped.
    LaurentMatrix block(3, 3);
    block(0, 0) = LaurentPoly::parse("3 - t - t^-1");
    block(1, 1) = LaurentPoly(5.0);
    CHECK(std::abs(fourier_log_det(block) - 2.0 * std::log(golden) - std::log(5.0)) < 1e-10);

    RandomSource rng(19);
    for (int trial = 0; trial < 10; ++trial) {
        const LaurentPoly p = random_integer_poly(rng);
        const LaurentMatrix op = LaurentMatrix::scalar(p * p.adjoint());
        CHECK(std::abs(fourier_log_det(op) - 2.0 * log_mahler_by_roots(p)) < 1e-7);
    }
    QuadratureConfig tight;
    tight.tolerance = 1e-30;
    tight.max_subdivisions = 20;
    CHECK_THROWS_AS((void)fourier_log_det(scalar_op("2 - t - t^-1"), tight), NumericalError);
}

TEST_CASE("limit of the spectral distributions") {
    const ApproxTower tower = build_tower(scalar_op("2 - t - t^-1"), default_levels());
    // λ = 0: kernel is the constants, N_m(0) = 1/m → 0.
    LimitReport r0 = limit_distribution_check(tower, 0.0, {0.0});
    CHECK(std::abs(r0.oracle) < 1e-8);
    for (std::size_t k = 0; k < tower.data.size(); ++k)
        CHECK(r0.rows[0].level_values[k] == doctest::Approx(1.0 / tower.data[k].m));
    // λ = 4: everything.
    LimitReport r4 = limit_distribution_check(tower, 4.0, {0.0, 0.5});
    CHECK(std::abs(r4.oracle - 1.0) < 1e-8);
    for (double v : r4.rows[0].level_values) CHECK(v == doctest::Approx(1.0));
    // λ = 2: arccos computation gives 1/2.
    LimitReport r2 = limit_distribution_check(tower, 2.0, {0.0, 1e-3, 1e-2, 1e-1});
    CHECK(std::abs(r2.oracle - 0.5) < 1e-9);
    for (std::size_t k = 0; k < tower.data.size(); ++k)
        CHECK(std::abs(r2.rows[0].level_values[k] - 0.5) <= 2.0 / tower.data[k].m);
    CHECK(r2.anomalies.empty());
    // Oracle against the same arccos formula at another λ.
    const double lambda = 0.7;
    const double exact = std::acos(1.0 - lambda / 2.0) / std::numbers::pi;
    CHECK(std::abs(limit_distribution(tower.op, lambda) - exact) < 1e-9);
}

TEST_CASE("semicontinuity and nonnegativity") {
    const ApproxTower tower = build_tower(scalar_op("2 - t - t^-1"), default_levels());
    const SemicontinuityReport s = semicontinuity_check(tower);
    CHECK(s.log_det_bound);
    CHECK(s.integral_bound);
    CHECK(std::abs(s.oracle_integral - std::log(4.0)) < 1e-6);

    NonnegativityReport n = nonnegativity_check(tower);
    CHECK(n.passed);
    CHECK(n.integrality_checked >= 8);
    for (std::size_t k = 0; k < tower.data.size(); ++k) {
        const double m = tower.data[k].m;
        CHECK(n.det_prime[k] == doctest::Approx(m * m).epsilon(1e-9));
    }
    CHECK(nonnegativity_check(build_tower(scalar_op("4"), {1, 2, 4})).passed);
    CHECK_THROWS_AS((void)nonnegativity_check(build_tower(scalar_op("0.5"), {2})), ValidationError);

    RandomSource rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const LaurentPoly p = random_integer_poly(rng);
        const LaurentMatrix op = LaurentMatrix::scalar(p * p.adjoint());
        const NonnegativityReport r = nonnegativity_check(build_tower(op, parse_levels("2..256")));
        CHECK(r.passed);
        CHECK(r.integrality_checked >= 1);
        CHECK(r.fourier >= -1e-8);
        // Off-circle zeros near |z| = 1 make L_m oscillate around the limit with
        // decay |z|^-m; at m = 32 that is still 1e-6 for |z| = √2.
        const SemicontinuityReport sr = semicontinuity_check(build_tower(op, default_levels()));
        INFO(p.to_string());
        CHECK(sr.log_det_bound);
        CHECK(sr.integral_bound);
    }
}
