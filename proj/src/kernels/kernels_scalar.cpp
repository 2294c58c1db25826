// Scalar reference kernels. Plain loops in a fixed summation order; the SIMD
// variants are tested against these.

#include "zonectl/kernels.hpp"

namespace zonectl::kernels::detail {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_abt_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                     std::size_t k, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = dot_scalar(a + i * k, b + j * k, k);
            c[i * n + j] = accumulate ? c[i * n + j] + v : v;
        }
    }
}

void gemm_ab_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                    std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            axpy_scalar(a[i * k + p], b + p * n, crow, n);
        }
    }
}

void gemm_atb_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                     std::size_t k) {
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) axpy_scalar(arow[i], brow, c + i * n, n);
    }
}

}  // namespace

KernelTable make_scalar_table() {
    return KernelTable{Isa::scalar, dot_scalar, axpy_scalar, gemm_abt_scalar, gemm_ab_scalar,
                       gemm_atb_scalar};
}

}  // namespace zonectl::kernels::detail
