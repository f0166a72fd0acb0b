#pragma once

// Data-parallel inner loops shared by the solvers.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2+FMA (x86-64) or NEON (aarch64) variant. The active
// table is chosen once at first use from the CPU's capabilities; setting
// MCLAB_ISA=scalar|avx2|neon in the environment pins a specific table.
//
// Reductions in the vector variants use a different summation order than the
// scalar reference, so results agree to rounding, not bit for bit.
// ratio_argmax is exact: both paths compute the same IEEE quotients.

#include <cstddef>
#include <span>
#include <string_view>

namespace mclab::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
    Isa isa;
    // sum_k a[k] * b[k]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_k w[k] * (a[k] - b[k])^2
    double (*masked_sq_diff)(const double* a, const double* b, const double* w, std::size_t n);
    // u[k] += step * w[k] * (y[k] - x[k])
    void (*masked_step)(double* u, const double* y, const double* x, const double* w, double step,
                        std::size_t n);
    // out[k] = x[k] * w[k]
    void (*mask_mul)(const double* x, const double* w, double* out, std::size_t n);
    // first k maximising num[k] / den[k]; n must be > 0
    std::size_t (*ratio_argmax)(const double* num, const double* den, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the variant is not compiled in or the CPU lacks the extension.
const KernelTable* simd_table(Isa isa);

const KernelTable& active();
std::string_view isa_name(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double masked_sq_diff(std::span<const double> a, std::span<const double> b, std::span<const double> w);
void masked_step(std::span<double> u, std::span<const double> y, std::span<const double> x,
                 std::span<const double> w, double step);
void mask_mul(std::span<const double> x, std::span<const double> w, std::span<double> out);
std::size_t ratio_argmax(std::span<const double> num, std::span<const double> den);

}  // namespace mclab::kernels
