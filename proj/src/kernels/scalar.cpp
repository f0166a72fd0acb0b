#include "variants.hpp"

namespace mclab::kernels::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
    return acc;
}

double masked_sq_diff(const double* a, const double* b, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = a[k] - b[k];
        acc += w[k] * d * d;
    }
    return acc;
}

void masked_step(double* u, const double* y, const double* x, const double* w, double step,
                 std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) u[k] += step * w[k] * (y[k] - x[k]);
}

void mask_mul(const double* x, const double* w, double* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) out[k] = x[k] * w[k];
}

std::size_t ratio_argmax(const double* num, const double* den, std::size_t n) {
    std::size_t best = 0;
    double best_value = num[0] / den[0];
    for (std::size_t k = 1; k < n; ++k) {
        const double v = num[k] / den[k];
        if (v > best_value) {
            best_value = v;
            best = k;
        }
    }
    return best;
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{Isa::scalar, dot, masked_sq_diff, masked_step, mask_mul, ratio_argmax};
    return table;
}

}  // namespace mclab::kernels::detail
