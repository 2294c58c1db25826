#include "zonectl/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace zonectl::kernels {

namespace {

bool cpu_has_avx2_fma() {
#if defined(ZONECTL_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* resolve_default() {
    const char* forced = std::getenv("ZONECTL_ISA");
    if (forced != nullptr) {
        std::string_view want{forced};
        if (want == "scalar") return &scalar_table();
        if (want == "avx2" && avx2_table() != nullptr) return avx2_table();
        if (want == "neon" && neon_table() != nullptr) return neon_table();
    }
    if (const auto* t = avx2_table()) return t;
    if (const auto* t = neon_table()) return t;
    return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{resolve_default()};
    return table;
}

void check_dims(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("kernel dimension mismatch: ") + what);
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

const KernelTable& scalar_table() {
    static const KernelTable table = detail::make_scalar_table();
    return table;
}

const KernelTable* avx2_table() {
#if defined(ZONECTL_WITH_AVX2)
    static const KernelTable table = detail::make_avx2_table();
    static const bool usable = cpu_has_avx2_fma();
    return usable ? &table : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable* neon_table() {
#if defined(ZONECTL_WITH_NEON)
    static const KernelTable table = detail::make_neon_table();
    return &table;
#else
    return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

Isa active_isa() { return active().isa; }

bool select_isa(Isa isa) {
    const KernelTable* table = nullptr;
    switch (isa) {
        case Isa::scalar: table = &scalar_table(); break;
        case Isa::avx2: table = avx2_table(); break;
        case Isa::neon: table = neon_table(); break;
    }
    if (table == nullptr) return false;
    current().store(table, std::memory_order_relaxed);
    return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
    check_dims(a.size() == b.size(), "dot");
    return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    check_dims(x.size() == y.size(), "axpy");
    active().axpy(alpha, x.data(), y.data(), x.size());
}

void gemm_abt(ConstMatrixView a, ConstMatrixView b, MatrixView c, bool accumulate) {
    check_dims(a.cols == b.cols && c.rows == a.rows && c.cols == b.rows, "gemm_abt");
    active().gemm_abt(a.data, b.data, c.data, a.rows, b.rows, a.cols, accumulate);
}

void gemm_ab(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
    check_dims(a.cols == b.rows && c.rows == a.rows && c.cols == b.cols, "gemm_ab");
    active().gemm_ab(a.data, b.data, c.data, a.rows, b.cols, a.cols);
}

void gemm_atb(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
    check_dims(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols, "gemm_atb");
    active().gemm_atb(a.data, b.data, c.data, a.cols, b.cols, a.rows);
}

}  // namespace zonectl::kernels
