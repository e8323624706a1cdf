// aarch64 variant. Four float64x2 accumulators hold lanes (0,1) (2,3) (4,5) (6,7).
#include <arm_neon.h>

#include "lanes.hpp"
#include "toxcascade/kernels.hpp"

namespace toxcascade::kernels {
namespace {

using detail::kLanes;

inline float64x2_t widen(const float* p) { return vcvt_f64_f32(vld1_f32(p)); }

double dot_f32_neon(const float* a, const float* b, std::size_t n) {
  float64x2_t acc[4] = {vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0)};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (int k = 0; k < 4; ++k) {
      acc[k] = vaddq_f64(acc[k], vmulq_f64(widen(a + i + 2 * k), widen(b + i + 2 * k)));
    }
  }
  double lanes[kLanes];
  for (int k = 0; k < 4; ++k) vst1q_f64(lanes + 2 * k, acc[k]);
  for (; i < n; ++i) {
    lanes[i % kLanes] += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return detail::reduce_lanes(lanes);
}

double dot_f64_f32_neon(const double* w, const float* x, std::size_t n) {
  float64x2_t acc[4] = {vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0)};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (int k = 0; k < 4; ++k) {
      acc[k] = vaddq_f64(acc[k], vmulq_f64(vld1q_f64(w + i + 2 * k), widen(x + i + 2 * k)));
    }
  }
  double lanes[kLanes];
  for (int k = 0; k < 4; ++k) vst1q_f64(lanes + 2 * k, acc[k]);
  for (; i < n; ++i) lanes[i % kLanes] += w[i] * static_cast<double>(x[i]);
  return detail::reduce_lanes(lanes);
}

void axpy_f64_f32_neon(double alpha, const float* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, widen(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * static_cast<double>(x[i]);
}

void scale_f64_neon(double s, double* y, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(vld1q_f64(y + i), vs));
  for (; i < n; ++i) y[i] *= s;
}

}  // namespace

namespace detail {
const KernelTable& neon_table_impl() {
  static const KernelTable table{Isa::Neon, "neon", dot_f32_neon, dot_f64_f32_neon,
                                 axpy_f64_f32_neon, scale_f64_neon};
  return table;
}
}  // namespace detail

}  // namespace toxcascade::kernels
