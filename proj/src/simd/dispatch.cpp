#include <cstdlib>
#include <cstring>

#include "egl/errors.hpp"
#include "egl/pair_kernels.hpp"

namespace egl::simd {

namespace {

bool avx2_compiled() {
#ifdef EGL_HAVE_AVX2
    return true;
#else
    return false;
#endif
}

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa resolve() {
    const char* env = std::getenv("ENTROPY_LAB_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    if (env && std::strcmp(env, "avx2") == 0) {
        if (!avx2_compiled() || !avx2_supported())
            throw UsageError("ENTROPY_LAB_SIMD=avx2 but AVX2 is unavailable");
        return Isa::Avx2;
    }
    if (env && std::strcmp(env, "auto") != 0 && std::strlen(env) > 0)
        throw UsageError("ENTROPY_LAB_SIMD must be auto, scalar, or avx2");
    return avx2_compiled() && avx2_supported() ? Isa::Avx2 : Isa::Scalar;
}

} // namespace

Isa active_isa() {
    static const Isa isa = resolve();
    return isa;
}

std::string isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

double pair_energy_grad(const PairSpec& spec, int n, const double* const* coords,
                        double* const* grad, bool* coincident) {
#ifdef EGL_HAVE_AVX2
    if (active_isa() == Isa::Avx2)
        return pair_energy_grad_avx2(spec, n, coords, grad, coincident);
#endif
    return pair_energy_grad_scalar(spec, n, coords, grad, coincident);
}

double weighted_log_sum(int n, const double* x, const double* y, const double* w) {
#ifdef EGL_HAVE_AVX2
    if (active_isa() == Isa::Avx2) return weighted_log_sum_avx2(n, x, y, w);
#endif
    return weighted_log_sum_scalar(n, x, y, w);
}

} // namespace egl::simd
