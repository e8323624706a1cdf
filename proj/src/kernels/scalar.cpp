#include "toxcascade/kernels.hpp"

#include "lanes.hpp"

namespace toxcascade::kernels {
namespace {

using detail::kLanes;

double dot_f32_scalar(const float* a, const float* b, std::size_t n) {
  double lanes[kLanes] = {};
  for (std::size_t i = 0; i < n; ++i) {
    lanes[i % kLanes] += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return detail::reduce_lanes(lanes);
}

double dot_f64_f32_scalar(const double* w, const float* x, std::size_t n) {
  double lanes[kLanes] = {};
  for (std::size_t i = 0; i < n; ++i) {
    lanes[i % kLanes] += w[i] * static_cast<double>(x[i]);
  }
  return detail::reduce_lanes(lanes);
}

void axpy_f64_f32_scalar(double alpha, const float* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * static_cast<double>(x[i]);
}

void scale_f64_scalar(double s, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= s;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar, "scalar", dot_f32_scalar, dot_f64_f32_scalar,
                                 axpy_f64_f32_scalar, scale_f64_scalar};
  return table;
}

}  // namespace toxcascade::kernels
