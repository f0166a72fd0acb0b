#include <cstdlib>
#include <stdexcept>
#include <string>

#include "variants.hpp"

namespace mclab::kernels {
namespace {

bool cpu_has_avx2() {
#if MCLAB_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& select() {
    const KernelTable* best = simd_table(Isa::avx2);
    if (!best) best = simd_table(Isa::neon);
    if (!best) best = &scalar_table();

    if (const char* forced = std::getenv("MCLAB_ISA")) {
        const std::string name(forced);
        if (name == "scalar") return scalar_table();
        for (Isa isa : {Isa::avx2, Isa::neon}) {
            if (name == isa_name(isa)) {
                if (const KernelTable* t = simd_table(isa)) return *t;
                throw std::runtime_error("MCLAB_ISA=" + name + " is not available on this CPU");
            }
        }
        throw std::runtime_error("unknown MCLAB_ISA value: " + name);
    }
    return *best;
}

void check_same(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": span length mismatch");
}

}  // namespace

const KernelTable& scalar_table() { return detail::scalar_kernels(); }

const KernelTable* simd_table(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return &scalar_table();
        case Isa::avx2:
#if MCLAB_HAVE_AVX2
            if (cpu_has_avx2()) return &detail::avx2_kernels();
#endif
            return nullptr;
        case Isa::neon:
#if MCLAB_HAVE_NEON
            return &detail::neon_kernels();
#else
            return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

double dot(std::span<const double> a, std::span<const double> b) {
    check_same(a.size(), b.size(), "dot");
    return active().dot(a.data(), b.data(), a.size());
}

double masked_sq_diff(std::span<const double> a, std::span<const double> b, std::span<const double> w) {
    check_same(a.size(), b.size(), "masked_sq_diff");
    check_same(a.size(), w.size(), "masked_sq_diff");
    return active().masked_sq_diff(a.data(), b.data(), w.data(), a.size());
}

void masked_step(std::span<double> u, std::span<const double> y, std::span<const double> x,
                 std::span<const double> w, double step) {
    check_same(u.size(), y.size(), "masked_step");
    check_same(u.size(), x.size(), "masked_step");
    check_same(u.size(), w.size(), "masked_step");
    active().masked_step(u.data(), y.data(), x.data(), w.data(), step, u.size());
}

void mask_mul(std::span<const double> x, std::span<const double> w, std::span<double> out) {
    check_same(x.size(), w.size(), "mask_mul");
    check_same(x.size(), out.size(), "mask_mul");
    active().mask_mul(x.data(), w.data(), out.data(), x.size());
}

std::size_t ratio_argmax(std::span<const double> num, std::span<const double> den) {
    check_same(num.size(), den.size(), "ratio_argmax");
    if (num.empty()) throw std::invalid_argument("ratio_argmax: empty input");
    return active().ratio_argmax(num.data(), den.data(), num.size());
}

}  // namespace mclab::kernels
