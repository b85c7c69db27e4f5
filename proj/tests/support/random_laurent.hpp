#ifndef TORSIONLAB_TESTS_RANDOM_LAURENT_HPP
#define TORSIONLAB_TESTS_RANDOM_LAURENT_HPP

#include "torsionlab/lueck.hpp"
#include "torsionlab/random.hpp"

namespace torsionlab::testing {

/// Integer coefficients in −2..2 on at most four consecutive exponents
/// starting in −2..0; never zero.
inline LaurentPoly random_integer_poly(RandomSource& rng) {
    LaurentPoly p;
    const int lo = rng.uniform_int(-2, 0);
    const int hi = rng.uniform_int(lo, lo + 3);
    for (int k = lo; k <= hi; ++k) p += LaurentPoly::monomial(k, rng.uniform_int(-2, 2));
    if (p.is_zero()) p = LaurentPoly(1.0);
    return p;
}

}  // namespace torsionlab::testing

#endif
