#pragma once

// Seeded random instance generators shared by the tests, the experiment
// runner and the acceptance binary.

#include "filtration.hpp"
#include "goodlambda.hpp"
#include "rng.hpp"

namespace ncgl {

/// One of the small filtration families with total dimension <= 16 and at
/// most 6 levels (N <= 5).
FiltrationPtr random_small_filtration(Rng& rng);

/// Random corner filtration M_d, d in [dmin, dmax].
FiltrationPtr random_corner_filtration(Rng& rng, Index dmin = 2, Index dmax = 5);

/// Martingale with ||y_N||_inf = scale.
Martingale random_scaled_martingale(const FiltrationPtr& f, Rng& rng, double scale);

/// x = z = S_N(y).
Triple bg_triple(const Martingale& y);

/// Random triple satisfying the strong testing conditions: y is a random
/// martingale of norm in [0.3, 4], x^2 = S_N(y)^2 + a and z^2 = S_N(y)^2 + b
/// with random PSD a, b of random size (sometimes zero).
Triple random_strong_triple(Rng& rng);

}  // namespace ncgl
