// NEON kernels for aarch64 (float64x2_t). NEON is architecturally mandatory
// on aarch64, so no runtime probe is needed.

#include <arm_neon.h>

#include "zonectl/kernels.hpp"

namespace zonectl::kernels::detail {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_abt_neon(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                   std::size_t k, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = dot_neon(a + i * k, b + j * k, k);
            c[i * n + j] = accumulate ? c[i * n + j] + v : v;
        }
    }
}

void gemm_ab_neon(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                  std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) axpy_neon(a[i * k + p], b + p * n, c + i * n, n);
    }
}

void gemm_atb_neon(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                   std::size_t k) {
    for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t i = 0; i < m; ++i) axpy_neon(a[p * m + i], b + p * n, c + i * n, n);
    }
}

}  // namespace

KernelTable make_neon_table() {
    return KernelTable{Isa::neon, dot_neon, axpy_neon, gemm_abt_neon, gemm_ab_neon, gemm_atb_neon};
}

}  // namespace zonectl::kernels::detail
