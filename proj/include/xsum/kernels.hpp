#pragma once

#include <cstddef>
#include <string_view>

namespace xsum::kernels {

// Dense float64 primitives used by every model's forward and backward pass.
// Matrices are row-major with a row stride equal to `cols`.
struct KernelTable {
    std::string_view name;
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y += A x,  A is rows x cols, x has cols entries, y has rows entries
    void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
    // y += A^T x,  x has rows entries, y has cols entries
    void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
    // A += alpha * x y^T,  x has rows entries, y has cols entries
    void (*ger)(double* a, std::size_t rows, std::size_t cols, double alpha, const double* x, const double* y);
};

const KernelTable& scalar_table();
// nullptr when the variant is not compiled in or the CPU lacks the extension.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Table picked at first use: the widest supported variant, unless the
// XSUM_KERNELS environment variable names one ("scalar", "avx2", "neon").
const KernelTable& active();

// Overrides the active table; returns the previous one.
const KernelTable& set_active(const KernelTable& table);

}  // namespace xsum::kernels
