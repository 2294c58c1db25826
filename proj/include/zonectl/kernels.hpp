#pragma once
// Dense double-precision kernels used by the MLP stack and the simplex solver.
//
// Every kernel has a scalar reference implementation. SIMD variants (AVX2+FMA
// on x86-64, NEON on aarch64) are selected once at runtime; the choice can be
// forced with the ZONECTL_ISA environment variable ("scalar", "avx2", "neon")
// or with select_isa() in tests. SIMD variants reassociate sums, so results
// agree with the scalar reference to rounding, not bit-for-bit. Within one
// process the selected table never changes, so runs stay reproducible.

#include <cstddef>
#include <span>
#include <string_view>

namespace zonectl::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// Row-major matrix views. Rows are contiguous with stride == cols.
struct ConstMatrixView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

struct MatrixView {
    double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    operator ConstMatrixView() const { return {data, rows, cols}; }
};

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // C[m x n] (+)= A[m x k] * B[n x k]^T
    void (*gemm_abt)(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                     std::size_t k, bool accumulate);
    // C[m x n] += A[m x k] * B[k x n]
    void (*gemm_ab)(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                    std::size_t k);
    // C[m x n] += A[k x m]^T * B[k x n]
    void (*gemm_atb)(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                     std::size_t k);
};

const KernelTable& scalar_table();
/// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_table();
const KernelTable* neon_table();

/// Table in use. Resolved on first call.
const KernelTable& active();
Isa active_isa();
/// Returns false (and keeps the current table) if the ISA is unavailable.
bool select_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// c = a * b^T, or c += a * b^T when accumulate is set.
void gemm_abt(ConstMatrixView a, ConstMatrixView b, MatrixView c, bool accumulate = false);
/// c += a * b
void gemm_ab(ConstMatrixView a, ConstMatrixView b, MatrixView c);
/// c += a^T * b
void gemm_atb(ConstMatrixView a, ConstMatrixView b, MatrixView c);

namespace detail {
KernelTable make_scalar_table();
#if defined(ZONECTL_WITH_AVX2)
KernelTable make_avx2_table();
#endif
#if defined(ZONECTL_WITH_NEON)
KernelTable make_neon_table();
#endif
}  // namespace detail

}  // namespace zonectl::kernels
