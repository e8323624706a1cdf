// Compiled with -mavx2 only; never reached unless the CPU reports AVX2.
#include <immintrin.h>

#include "lanes.hpp"
#include "toxcascade/kernels.hpp"

namespace toxcascade::kernels {
namespace {

using detail::kLanes;

double dot_f32_avx2(const float* a, const float* b, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256 va = _mm256_loadu_ps(a + i);
    const __m256 vb = _mm256_loadu_ps(b + i);
    const __m256d a_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(va));
    const __m256d a_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(va, 1));
    const __m256d b_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(vb));
    const __m256d b_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1));
    lo = _mm256_add_pd(lo, _mm256_mul_pd(a_lo, b_lo));
    hi = _mm256_add_pd(hi, _mm256_mul_pd(a_hi, b_hi));
  }
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, lo);
  _mm256_store_pd(lanes + 4, hi);
  for (; i < n; ++i) {
    lanes[i % kLanes] += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return detail::reduce_lanes(lanes);
}

double dot_f64_f32_avx2(const double* w, const float* x, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256 vx = _mm256_loadu_ps(x + i);
    const __m256d x_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(vx));
    const __m256d x_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(vx, 1));
    lo = _mm256_add_pd(lo, _mm256_mul_pd(_mm256_loadu_pd(w + i), x_lo));
    hi = _mm256_add_pd(hi, _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), x_hi));
  }
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, lo);
  _mm256_store_pd(lanes + 4, hi);
  for (; i < n; ++i) lanes[i % kLanes] += w[i] * static_cast<double>(x[i]);
  return detail::reduce_lanes(lanes);
}

void axpy_f64_f32_avx2(double alpha, const float* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) y[i] += alpha * static_cast<double>(x[i]);
}

void scale_f64_avx2(double s, double* y, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), vs));
  for (; i < n; ++i) y[i] *= s;
}

}  // namespace

namespace detail {
const KernelTable& avx2_table_impl() {
  static const KernelTable table{Isa::Avx2, "avx2", dot_f32_avx2, dot_f64_f32_avx2,
                                 axpy_f64_f32_avx2, scale_f64_avx2};
  return table;
}
}  // namespace detail

}  // namespace toxcascade::kernels
