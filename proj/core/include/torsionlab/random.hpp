#ifndef TORSIONLAB_RANDOM_HPP
#define TORSIONLAB_RANDOM_HPP

// Seeded generators of A-linear test data: complexes with prescribed shape,
// short exact sequences with non-split coboundary twists, and chain maps.

#include <cstdint>
#include <random>

#include "torsionlab/exact_seq.hpp"

namespace torsionlab {

class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    Complex complex_normal() { return {normal(), normal()}; }
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Random element of the group ring (or a scalar for C), as an ambient
/// |Γ|×|Γ| matrix.
[[nodiscard]] Matrix random_group_ring_block(const TraceContext& context, RandomSource& rng);

/// Random A-linear map between free modules of the given ranks.
[[nodiscard]] Matrix random_a_linear(const TraceContext& context, Eigen::Index rows,
                                     Eigen::Index cols, RandomSource& rng);

/// Random A-linear automorphism of a free module, with condition number
/// kept moderate by a diagonal shift.
[[nodiscard]] Matrix random_a_linear_invertible(const TraceContext& context, Eigen::Index rank,
                                                RandomSource& rng);

struct RandomComplexShape {
    int start_degree = 0;
    int length = 3;
    int max_pairs = 2;       // elementary W → W pieces per adjacent degree pair
    int max_harmonic = 1;    // free harmonic summands per degree
    bool allow_singular = true;  // some pieces use non-invertible group-ring maps
    bool conjugate = true;   // random change of basis in every degree
};

/// Direct sum of elementary pieces, conjugated by random automorphisms.
[[nodiscard]] CochainComplex random_complex(const TraceContext& context,
                                            const RandomComplexShape& shape, RandomSource& rng);

struct RandomSesOptions {
    bool coboundary_twist = true;  // θ gets d¹u − u d³
    bool harmonic_twist = true;    // θ gets Π¹ Y Π³ (nonzero connecting maps)
    bool change_basis = true;      // random automorphism of C²

    static RandomSesOptions split() { return {false, false, false}; }
};

/// C² = C¹ ⊕ C³ with d² = [[d¹, θ], [0, d³]], θ_i = d¹u_i − u_{i+1}d³ +
/// Π¹_{i+1} Y_i Π³_i (Π the harmonic projections), followed by a random
/// change of basis of C².
[[nodiscard]] ComplexSES random_ses(const CochainComplex& sub, const CochainComplex& quotient,
                                    RandomSource& rng, const RandomSesOptions& options = {});

/// Random SES whose middle complex spans at most `max_length` degrees with
/// every module of ambient dimension ≤ `max_ambient`. Sub and quotient start
/// at degree 0 or 1; shapes are redrawn until the bounds hold.
[[nodiscard]] ComplexSES random_bounded_ses(const TraceContext& context, int max_length,
                                            Eigen::Index max_ambient, RandomSource& rng);

/// f = d² h + h d¹ + Π² Y Π¹ between complexes on the same degree range.
[[nodiscard]] ComplexMorphism random_chain_map(const CochainComplex& source,
                                               const CochainComplex& target, RandomSource& rng);

/// C² = P C¹ P⁻¹ with f = P degreewise invertible.
[[nodiscard]] ComplexMorphism random_chain_isomorphism(const CochainComplex& source,
                                                       RandomSource& rng);

}  // namespace torsionlab

#endif
