#include <arm_neon.h>

#include "variants.hpp"

namespace mclab::kernels::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + k), vld1q_f64(b + k));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + k + 2), vld1q_f64(b + k + 2));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; k < n; ++k) acc += a[k] * b[k];
    return acc;
}

double masked_sq_diff(const double* a, const double* b, const double* w, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + k), vld1q_f64(b + k));
        acc = vfmaq_f64(acc, vmulq_f64(vld1q_f64(w + k), d), d);
    }
    double total = vaddvq_f64(acc);
    for (; k < n; ++k) {
        const double d = a[k] - b[k];
        total += w[k] * d * d;
    }
    return total;
}

void masked_step(double* u, const double* y, const double* x, const double* w, double step,
                 std::size_t n) {
    const float64x2_t s = vdupq_n_f64(step);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(y + k), vld1q_f64(x + k));
        vst1q_f64(u + k, vfmaq_f64(vld1q_f64(u + k), vmulq_f64(s, vld1q_f64(w + k)), d));
    }
    for (; k < n; ++k) u[k] += step * w[k] * (y[k] - x[k]);
}

void mask_mul(const double* x, const double* w, double* out, std::size_t n) {
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) vst1q_f64(out + k, vmulq_f64(vld1q_f64(x + k), vld1q_f64(w + k)));
    for (; k < n; ++k) out[k] = x[k] * w[k];
}

std::size_t ratio_argmax(const double* num, const double* den, std::size_t n) {
    double best = num[0] / den[0];
    std::size_t k = 0;
    if (n >= 2) {
        float64x2_t vmax = vdivq_f64(vld1q_f64(num), vld1q_f64(den));
        for (k = 2; k + 2 <= n; k += 2)
            vmax = vmaxq_f64(vmax, vdivq_f64(vld1q_f64(num + k), vld1q_f64(den + k)));
        best = vmaxvq_f64(vmax);
    }
    for (; k < n; ++k) {
        const double v = num[k] / den[k];
        if (v > best) best = v;
    }
    for (k = 0; k < n; ++k)
        if (num[k] / den[k] == best) return k;
    return 0;
}

}  // namespace

const KernelTable& neon_kernels() {
    static const KernelTable table{Isa::neon, dot, masked_sq_diff, masked_step, mask_mul, ratio_argmax};
    return table;
}

}  // namespace mclab::kernels::detail
