#include "placeorigin/kernels/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

#include <limits>

namespace placeorigin::kernels::detail {

namespace {

double dot_neon(const float* a, const float* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t va = vld1q_f32(a + i);
    const float32x4_t vb = vld1q_f32(b + i);
    acc0 = vfmaq_f64(acc0, vcvt_f64_f32(vget_low_f32(va)),
                     vcvt_f64_f32(vget_low_f32(vb)));
    acc1 = vfmaq_f64(acc1, vcvt_high_f64_f32(va), vcvt_high_f64_f32(vb));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double sqdist_neon(const float* a, const float* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t va = vld1q_f32(a + i);
    const float32x4_t vb = vld1q_f32(b + i);
    const float64x2_t d0 = vsubq_f64(vcvt_f64_f32(vget_low_f32(va)),
                                     vcvt_f64_f32(vget_low_f32(vb)));
    const float64x2_t d1 =
        vsubq_f64(vcvt_high_f64_f32(va), vcvt_high_f64_f32(vb));
    acc0 = vfmaq_f64(acc0, d0, d0);
    acc1 = vfmaq_f64(acc1, d1, d1);
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

double maxsim_neon(const float* query, std::size_t query_rows,
                   const float* doc, std::size_t doc_rows, std::size_t dim) {
  double total = 0.0;
  for (std::size_t i = 0; i < query_rows; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < doc_rows; ++j) {
      const double s = dot_neon(query + i * dim, doc + j * dim, dim);
      if (s > best) best = s;
    }
    total += best;
  }
  return total;
}

constexpr KernelSet kNeon{"neon", dot_neon, sqdist_neon, maxsim_neon};

}  // namespace

const KernelSet& neon_kernels() { return kNeon; }

}  // namespace placeorigin::kernels::detail
#endif
