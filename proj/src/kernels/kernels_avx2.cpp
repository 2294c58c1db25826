// AVX2 + FMA kernels. Compiled with -mavx2 -mfma; only reached after a
// runtime CPU check.

#include <immintrin.h>

#include "zonectl/kernels.hpp"

namespace zonectl::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double sum = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i + 4,
                         _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

// 2 rows of A against 4 rows of B; each of the 8 outputs is a length-k dot.
inline void abt_block_2x4(const double* a0, const double* a1, const double* b0, const double* b1,
                          const double* b2, const double* b3, std::size_t k, double out[8]) {
    __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
    __m256d c02 = _mm256_setzero_pd(), c03 = _mm256_setzero_pd();
    __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
    __m256d c12 = _mm256_setzero_pd(), c13 = _mm256_setzero_pd();
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) {
        const __m256d x0 = _mm256_loadu_pd(a0 + p);
        const __m256d x1 = _mm256_loadu_pd(a1 + p);
        __m256d w = _mm256_loadu_pd(b0 + p);
        c00 = _mm256_fmadd_pd(x0, w, c00);
        c10 = _mm256_fmadd_pd(x1, w, c10);
        w = _mm256_loadu_pd(b1 + p);
        c01 = _mm256_fmadd_pd(x0, w, c01);
        c11 = _mm256_fmadd_pd(x1, w, c11);
        w = _mm256_loadu_pd(b2 + p);
        c02 = _mm256_fmadd_pd(x0, w, c02);
        c12 = _mm256_fmadd_pd(x1, w, c12);
        w = _mm256_loadu_pd(b3 + p);
        c03 = _mm256_fmadd_pd(x0, w, c03);
        c13 = _mm256_fmadd_pd(x1, w, c13);
    }
    out[0] = hsum(c00);
    out[1] = hsum(c01);
    out[2] = hsum(c02);
    out[3] = hsum(c03);
    out[4] = hsum(c10);
    out[5] = hsum(c11);
    out[6] = hsum(c12);
    out[7] = hsum(c13);
    for (; p < k; ++p) {
        out[0] += a0[p] * b0[p];
        out[1] += a0[p] * b1[p];
        out[2] += a0[p] * b2[p];
        out[3] += a0[p] * b3[p];
        out[4] += a1[p] * b0[p];
        out[5] += a1[p] * b1[p];
        out[6] += a1[p] * b2[p];
        out[7] += a1[p] * b3[p];
    }
}

void gemm_abt_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                   std::size_t k, bool accumulate) {
    const std::size_t m2 = m - m % 2;
    const std::size_t n4 = n - n % 4;
    double out[8];
    for (std::size_t i = 0; i < m2; i += 2) {
        const double* a0 = a + i * k;
        const double* a1 = a0 + k;
        double* c0 = c + i * n;
        double* c1 = c0 + n;
        for (std::size_t j = 0; j < n4; j += 4) {
            const double* bj = b + j * k;
            abt_block_2x4(a0, a1, bj, bj + k, bj + 2 * k, bj + 3 * k, k, out);
            for (int t = 0; t < 4; ++t) {
                c0[j + t] = accumulate ? c0[j + t] + out[t] : out[t];
                c1[j + t] = accumulate ? c1[j + t] + out[4 + t] : out[4 + t];
            }
        }
        for (std::size_t j = n4; j < n; ++j) {
            const double v0 = dot_avx2(a0, b + j * k, k);
            const double v1 = dot_avx2(a1, b + j * k, k);
            c0[j] = accumulate ? c0[j] + v0 : v0;
            c1[j] = accumulate ? c1[j] + v1 : v1;
        }
    }
    for (std::size_t i = m2; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = dot_avx2(a + i * k, b + j * k, k);
            c[i * n + j] = accumulate ? c[i * n + j] + v : v;
        }
    }
}

// C[m x n] += sum_p A(i, p) * B[p][:], with A(i, p) = a[i * si + p * sp].
void gemm_strided_a(const double* a, std::size_t si, std::size_t sp, const double* b, double* c,
                    std::size_t m, std::size_t n, std::size_t k) {
    const std::size_t m4 = m - m % 4;
    const std::size_t n8 = n - n % 8;
    for (std::size_t i = 0; i < m4; i += 4) {
        double* c0 = c + i * n;
        double* c1 = c0 + n;
        double* c2 = c1 + n;
        double* c3 = c2 + n;
        for (std::size_t j = 0; j < n8; j += 8) {
            __m256d r00 = _mm256_loadu_pd(c0 + j), r01 = _mm256_loadu_pd(c0 + j + 4);
            __m256d r10 = _mm256_loadu_pd(c1 + j), r11 = _mm256_loadu_pd(c1 + j + 4);
            __m256d r20 = _mm256_loadu_pd(c2 + j), r21 = _mm256_loadu_pd(c2 + j + 4);
            __m256d r30 = _mm256_loadu_pd(c3 + j), r31 = _mm256_loadu_pd(c3 + j + 4);
            for (std::size_t p = 0; p < k; ++p) {
                const double* brow = b + p * n + j;
                const __m256d b0 = _mm256_loadu_pd(brow);
                const __m256d b1 = _mm256_loadu_pd(brow + 4);
                const double* ap = a + i * si + p * sp;
                __m256d x = _mm256_broadcast_sd(ap);
                r00 = _mm256_fmadd_pd(x, b0, r00);
                r01 = _mm256_fmadd_pd(x, b1, r01);
                x = _mm256_broadcast_sd(ap + si);
                r10 = _mm256_fmadd_pd(x, b0, r10);
                r11 = _mm256_fmadd_pd(x, b1, r11);
                x = _mm256_broadcast_sd(ap + 2 * si);
                r20 = _mm256_fmadd_pd(x, b0, r20);
                r21 = _mm256_fmadd_pd(x, b1, r21);
                x = _mm256_broadcast_sd(ap + 3 * si);
                r30 = _mm256_fmadd_pd(x, b0, r30);
                r31 = _mm256_fmadd_pd(x, b1, r31);
            }
            _mm256_storeu_pd(c0 + j, r00);
            _mm256_storeu_pd(c0 + j + 4, r01);
            _mm256_storeu_pd(c1 + j, r10);
            _mm256_storeu_pd(c1 + j + 4, r11);
            _mm256_storeu_pd(c2 + j, r20);
            _mm256_storeu_pd(c2 + j + 4, r21);
            _mm256_storeu_pd(c3 + j, r30);
            _mm256_storeu_pd(c3 + j + 4, r31);
        }
        if (n8 < n) {
            for (std::size_t r = 0; r < 4; ++r) {
                double* crow = c + (i + r) * n;
                for (std::size_t p = 0; p < k; ++p) {
                    const double x = a[(i + r) * si + p * sp];
                    const double* brow = b + p * n;
                    for (std::size_t j = n8; j < n; ++j) crow[j] += x * brow[j];
                }
            }
        }
    }
    for (std::size_t i = m4; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) axpy_avx2(a[i * si + p * sp], b + p * n, crow, n);
    }
}

void gemm_ab_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                  std::size_t k) {
    gemm_strided_a(a, k, 1, b, c, m, n, k);
}

void gemm_atb_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                   std::size_t k) {
    gemm_strided_a(a, 1, m, b, c, m, n, k);
}

}  // namespace

KernelTable make_avx2_table() {
    return KernelTable{Isa::avx2, dot_avx2, axpy_avx2, gemm_abt_avx2, gemm_ab_avx2, gemm_atb_avx2};
}

}  // namespace zonectl::kernels::detail
