// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "variants.hpp"

namespace mclab::kernels::detail {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_max_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 8 <= n; k += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
    }
    for (; k + 4 <= n; k += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; k < n; ++k) acc += a[k] * b[k];
    return acc;
}

double masked_sq_diff(const double* a, const double* b, const double* w, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + k), d), d, acc);
    }
    double total = hsum(acc);
    for (; k < n; ++k) {
        const double d = a[k] - b[k];
        total += w[k] * d * d;
    }
    return total;
}

void masked_step(double* u, const double* y, const double* x, const double* w, double step,
                 std::size_t n) {
    const __m256d s = _mm256_set1_pd(step);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(y + k), _mm256_loadu_pd(x + k));
        const __m256d sw = _mm256_mul_pd(s, _mm256_loadu_pd(w + k));
        _mm256_storeu_pd(u + k, _mm256_fmadd_pd(sw, d, _mm256_loadu_pd(u + k)));
    }
    for (; k < n; ++k) u[k] += step * w[k] * (y[k] - x[k]);
}

void mask_mul(const double* x, const double* w, double* out, std::size_t n) {
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4)
        _mm256_storeu_pd(out + k, _mm256_mul_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(w + k)));
    for (; k < n; ++k) out[k] = x[k] * w[k];
}

std::size_t ratio_argmax(const double* num, const double* den, std::size_t n) {
    // Pass 1 finds the maximum quotient, pass 2 its first position.
    double best = num[0] / den[0];
    std::size_t k = 0;
    if (n >= 4) {
        __m256d vmax = _mm256_div_pd(_mm256_loadu_pd(num), _mm256_loadu_pd(den));
        for (k = 4; k + 4 <= n; k += 4)
            vmax = _mm256_max_pd(vmax, _mm256_div_pd(_mm256_loadu_pd(num + k), _mm256_loadu_pd(den + k)));
        best = hmax(vmax);
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

const KernelTable& avx2_kernels() {
    static const KernelTable table{Isa::avx2, dot, masked_sq_diff, masked_step, mask_mul, ratio_argmax};
    return table;
}

}  // namespace mclab::kernels::detail
