#pragma once
// Dense arithmetic kernels used by the embedder, the k-NN scan and SGD.
//
// Every kernel has a scalar reference implementation and optional SIMD
// variants (AVX2 on x86-64, NEON on aarch64) chosen once at runtime.
// All variants accumulate into the same eight double-precision lanes
// (lane = index mod 8) and reduce them in the same fixed order, without
// fused multiply-add, so every variant returns bit-identical results.

#include <cstddef>
#include <span>
#include <vector>

namespace toxcascade::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  const char* name;
  // sum_i a[i] * b[i], float inputs widened to double
  double (*dot_f32)(const float* a, const float* b, std::size_t n);
  // sum_i w[i] * x[i]
  double (*dot_f64_f32)(const double* w, const float* x, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy_f64_f32)(double alpha, const float* x, double* y, std::size_t n);
  // y[i] *= s
  void (*scale_f64)(double s, double* y, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the variant is not compiled in or the CPU lacks it.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Best table for this CPU. TOXCASCADE_KERNELS=scalar in the environment
// pins the scalar reference.
const KernelTable& active();

// Every table usable on this machine, scalar first.
std::vector<const KernelTable*> available_tables();

const char* isa_name(Isa isa);

inline double dot(std::span<const float> a, std::span<const float> b) {
  return active().dot_f32(a.data(), b.data(), a.size());
}

inline double dot(std::span<const double> w, std::span<const float> x) {
  return active().dot_f64_f32(w.data(), x.data(), w.size());
}

inline void axpy(double alpha, std::span<const float> x, std::span<double> y) {
  active().axpy_f64_f32(alpha, x.data(), y.data(), y.size());
}

inline void scale(double s, std::span<double> y) {
  active().scale_f64(s, y.data(), y.size());
}

}  // namespace toxcascade::kernels
