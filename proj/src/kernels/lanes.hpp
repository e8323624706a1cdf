#pragma once
// Shared lane layout for all kernel variants: eight double accumulators,
// element i feeds lane (i mod 8), reduced as ((l0+l4)+(l1+l5))+((l2+l6)+(l3+l7)).

#include <cstddef>

namespace toxcascade::kernels::detail {

inline constexpr std::size_t kLanes = 8;

inline double reduce_lanes(const double* lanes) {
  const double t0 = lanes[0] + lanes[4];
  const double t1 = lanes[1] + lanes[5];
  const double t2 = lanes[2] + lanes[6];
  const double t3 = lanes[3] + lanes[7];
  return (t0 + t1) + (t2 + t3);
}

}  // namespace toxcascade::kernels::detail
