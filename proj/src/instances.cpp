#include "instances.hpp"

namespace ncgl {

FiltrationPtr random_small_filtration(Rng& rng) {
  switch (rng.below(5)) {
    case 0: return share(families::corner(static_cast<Index>(2 + rng.below(4))));
    case 1: return share(families::rademacher(static_cast<int>(1 + rng.below(4))));
    case 2: return share(families::rademacher_matrix(static_cast<int>(1 + rng.below(2)), static_cast<Index>(2 + rng.below(3))));
    case 3: return share(families::rademacher_corner(static_cast<int>(1 + rng.below(2)), static_cast<Index>(2 + rng.below(3))));
    default: return share(families::rademacher_full(static_cast<int>(1 + rng.below(3)), 2));
  }
}

FiltrationPtr random_corner_filtration(Rng& rng, Index dmin, Index dmax) {
  return share(families::corner(dmin + static_cast<Index>(rng.below(static_cast<std::uint64_t>(dmax - dmin + 1)))));
}

Martingale random_scaled_martingale(const FiltrationPtr& f, Rng& rng, double scale) {
  Martingale y = random_martingale(f, rng, kInf);
  return ncgl::scale(y, scale);
}

Triple bg_triple(const Martingale& y) {
  Operator s = square_function(y);
  return Triple(s, y, s);
}

Triple random_strong_triple(Rng& rng) {
  FiltrationPtr f = random_small_filtration(rng);
  Martingale y = random_scaled_martingale(f, rng, rng.uniform(0.3, 4.0));
  const Operator s2 = (square_function(y) * square_function(y)).mark_hermitian();
  auto extra = [&]() {
    if (rng.below(3) == 0) return Operator::zero(f->algebra());
    return rng.uniform(0.0, 2.0) * random_psd(f->algebra(), rng);
  };
  Operator x = sqrt_psd((s2 + extra()).mark_hermitian());
  Operator z = sqrt_psd((s2 + extra()).mark_hermitian());
  return Triple(std::move(x), std::move(y), std::move(z));
}

}  // namespace ncgl
