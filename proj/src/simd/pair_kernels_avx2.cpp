// AVX2 variants of the pairwise kernels. Compiled with -mavx2 -mfma in its own
// translation unit; callers go through the runtime dispatcher.
#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

#include "egl/pair_kernels.hpp"

namespace egl::simd {

namespace {

// log(x) for positive finite x, 4 lanes. Exponent/mantissa split, then the
// atanh series log(m) = 2t(1 + t^2/3 + ...) with t = (m-1)/(m+1), |t| <= 0.172.
inline __m256d vlog(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);
    const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
    // integer exponent -> double via the 2^52 magic-number trick
    const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
    __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(exp_bits, magic)),
                              _mm256_set1_pd(4503599627370496.0 + 1023.0));
    const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
    __m256d m = _mm256_castsi256_pd(
        _mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));
    // keep m in [1/sqrt2, sqrt2)
    const __m256d sqrt2 = _mm256_set1_pd(1.4142135623730951);
    const __m256d big = _mm256_cmp_pd(m, sqrt2, _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
    e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d t = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d t2 = _mm256_mul_pd(t, t);
    __m256d p = _mm256_set1_pd(2.0 / 17.0);
    p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 15.0));
    p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 13.0));
    p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 11.0));
    p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 9.0));
    p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 7.0));
    p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 5.0));
    p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 3.0));
    p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0));
    p = _mm256_mul_pd(p, t);

    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
    return _mm256_add_pd(_mm256_fmadd_pd(e, ln2_lo, p), _mm256_mul_pd(e, ln2_hi));
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Fused energy + gradient for W = s*log(1/r), d in {1,2}.
double log_gas_pass(const PairSpec& spec, int n, const double* const* coords,
                    double* const* grad, bool* coincident) {
    const double* xs = coords[0];
    const double* ys = spec.d == 2 ? coords[1] : nullptr;
    double* gx = grad ? grad[0] : nullptr;
    double* gy = grad && spec.d == 2 ? grad[1] : nullptr;
    const __m256d thresh = _mm256_set1_pd(spec.coincidence_r2);
    const double s = spec.s;

    double log_acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const __m256d xi = _mm256_set1_pd(xs[i]);
        const __m256d yi = ys ? _mm256_set1_pd(ys[i]) : _mm256_setzero_pd();
        __m256d acc_log = _mm256_setzero_pd();
        __m256d acc_gx = _mm256_setzero_pd();
        __m256d acc_gy = _mm256_setzero_pd();
        int j = i + 1;
        for (; j + 4 <= n; j += 4) {
            const __m256d dx = _mm256_sub_pd(xi, _mm256_loadu_pd(xs + j));
            __m256d r2 = _mm256_mul_pd(dx, dx);
            __m256d dy = _mm256_setzero_pd();
            if (ys) {
                dy = _mm256_sub_pd(yi, _mm256_loadu_pd(ys + j));
                r2 = _mm256_fmadd_pd(dy, dy, r2);
            }
            if (_mm256_movemask_pd(_mm256_cmp_pd(r2, thresh, _CMP_LT_OQ))) {
                *coincident = true;
                return 0.0;
            }
            acc_log = _mm256_add_pd(acc_log, vlog(r2));
            if (gx) {
                const __m256d c = _mm256_div_pd(_mm256_set1_pd(-s), r2);
                const __m256d gxv = _mm256_mul_pd(c, dx);
                acc_gx = _mm256_add_pd(acc_gx, gxv);
                _mm256_storeu_pd(gx + j, _mm256_sub_pd(_mm256_loadu_pd(gx + j), gxv));
                if (gy) {
                    const __m256d gyv = _mm256_mul_pd(c, dy);
                    acc_gy = _mm256_add_pd(acc_gy, gyv);
                    _mm256_storeu_pd(gy + j, _mm256_sub_pd(_mm256_loadu_pd(gy + j), gyv));
                }
            }
        }
        double tail_log = 0.0, tail_gx = 0.0, tail_gy = 0.0;
        for (; j < n; ++j) {
            const double dx = xs[i] - xs[j];
            const double dy = ys ? ys[i] - ys[j] : 0.0;
            const double r2 = dx * dx + dy * dy;
            if (r2 < spec.coincidence_r2) {
                *coincident = true;
                return 0.0;
            }
            tail_log += std::log(r2);
            if (gx) {
                const double c = -s / r2;
                tail_gx += c * dx;
                gx[j] -= c * dx;
                if (gy) {
                    tail_gy += c * dy;
                    gy[j] -= c * dy;
                }
            }
        }
        log_acc += hsum(acc_log) + tail_log;
        if (gx) gx[i] += hsum(acc_gx) + tail_gx;
        if (gy) gy[i] += hsum(acc_gy) + tail_gy;
    }
    return -0.5 * s * log_acc;
}

// Fused energy + gradient for the d=3 Coulomb kernel W = 1/r.
double coulomb3_pass(const PairSpec& spec, int n, const double* const* coords,
                     double* const* grad, bool* coincident) {
    const double* xs = coords[0];
    const double* ys = coords[1];
    const double* zs = coords[2];
    double* gx = grad ? grad[0] : nullptr;
    double* gy = grad ? grad[1] : nullptr;
    double* gz = grad ? grad[2] : nullptr;
    const __m256d thresh = _mm256_set1_pd(spec.coincidence_r2);

    double energy = 0.0;
    for (int i = 0; i < n; ++i) {
        const __m256d xi = _mm256_set1_pd(xs[i]);
        const __m256d yi = _mm256_set1_pd(ys[i]);
        const __m256d zi = _mm256_set1_pd(zs[i]);
        __m256d acc_e = _mm256_setzero_pd();
        __m256d acc_gx = _mm256_setzero_pd();
        __m256d acc_gy = _mm256_setzero_pd();
        __m256d acc_gz = _mm256_setzero_pd();
        int j = i + 1;
        for (; j + 4 <= n; j += 4) {
            const __m256d dx = _mm256_sub_pd(xi, _mm256_loadu_pd(xs + j));
            const __m256d dy = _mm256_sub_pd(yi, _mm256_loadu_pd(ys + j));
            const __m256d dz = _mm256_sub_pd(zi, _mm256_loadu_pd(zs + j));
            __m256d r2 = _mm256_mul_pd(dx, dx);
            r2 = _mm256_fmadd_pd(dy, dy, r2);
            r2 = _mm256_fmadd_pd(dz, dz, r2);
            if (_mm256_movemask_pd(_mm256_cmp_pd(r2, thresh, _CMP_LT_OQ))) {
                *coincident = true;
                return 0.0;
            }
            const __m256d inv_r = _mm256_div_pd(_mm256_set1_pd(1.0), _mm256_sqrt_pd(r2));
            acc_e = _mm256_add_pd(acc_e, inv_r);
            if (gx) {
                // grad_1 (1/r) = -(x_i - x_j)/r^3
                const __m256d c =
                    _mm256_mul_pd(_mm256_mul_pd(inv_r, inv_r),
                                  _mm256_sub_pd(_mm256_setzero_pd(), inv_r));
                const __m256d gxv = _mm256_mul_pd(c, dx);
                const __m256d gyv = _mm256_mul_pd(c, dy);
                const __m256d gzv = _mm256_mul_pd(c, dz);
                acc_gx = _mm256_add_pd(acc_gx, gxv);
                acc_gy = _mm256_add_pd(acc_gy, gyv);
                acc_gz = _mm256_add_pd(acc_gz, gzv);
                _mm256_storeu_pd(gx + j, _mm256_sub_pd(_mm256_loadu_pd(gx + j), gxv));
                _mm256_storeu_pd(gy + j, _mm256_sub_pd(_mm256_loadu_pd(gy + j), gyv));
                _mm256_storeu_pd(gz + j, _mm256_sub_pd(_mm256_loadu_pd(gz + j), gzv));
            }
        }
        double te = 0.0, tgx = 0.0, tgy = 0.0, tgz = 0.0;
        for (; j < n; ++j) {
            const double dx = xs[i] - xs[j];
            const double dy = ys[i] - ys[j];
            const double dz = zs[i] - zs[j];
            const double r2 = dx * dx + dy * dy + dz * dz;
            if (r2 < spec.coincidence_r2) {
                *coincident = true;
                return 0.0;
            }
            const double inv_r = 1.0 / std::sqrt(r2);
            te += inv_r;
            if (gx) {
                const double c = -inv_r * inv_r * inv_r;
                tgx += c * dx;
                tgy += c * dy;
                tgz += c * dz;
                gx[j] -= c * dx;
                gy[j] -= c * dy;
                gz[j] -= c * dz;
            }
        }
        energy += hsum(acc_e) + te;
        if (gx) {
            gx[i] += hsum(acc_gx) + tgx;
            gy[i] += hsum(acc_gy) + tgy;
            gz[i] += hsum(acc_gz) + tgz;
        }
    }
    return energy;
}

} // namespace

double pair_energy_grad_avx2(const PairSpec& spec, int n, const double* const* coords,
                             double* const* grad, bool* coincident) {
    *coincident = false;
    if (spec.tag == PairSpec::Tag::Log2D && spec.d <= 2)
        return log_gas_pass(spec, n, coords, grad, coincident);
    if (spec.tag == PairSpec::Tag::Coulomb && spec.d == 3)
        return coulomb3_pass(spec, n, coords, grad, coincident);
    if (spec.tag == PairSpec::Tag::Coulomb && spec.d == 2) {
        PairSpec as_log = spec;
        as_log.tag = PairSpec::Tag::Log2D;
        as_log.s = 1.0;
        return log_gas_pass(as_log, n, coords, grad, coincident);
    }
    return pair_energy_grad_scalar(spec, n, coords, grad, coincident);
}

double weighted_log_sum_avx2(int n, const double* x, const double* y, const double* w) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const __m256d xi = _mm256_set1_pd(x[i]);
        const __m256d yi = _mm256_set1_pd(y[i]);
        __m256d row = _mm256_setzero_pd();
        int j = i + 1;
        for (; j + 4 <= n; j += 4) {
            const __m256d dx = _mm256_sub_pd(xi, _mm256_loadu_pd(x + j));
            const __m256d dy = _mm256_sub_pd(yi, _mm256_loadu_pd(y + j));
            __m256d r2 = _mm256_mul_pd(dx, dx);
            r2 = _mm256_fmadd_pd(dy, dy, r2);
            row = _mm256_fmadd_pd(_mm256_loadu_pd(w + j), vlog(r2), row);
        }
        double tail = 0.0;
        for (; j < n; ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            tail += w[j] * std::log(dx * dx + dy * dy);
        }
        acc += w[i] * (hsum(row) + tail);
    }
    return 0.5 * acc;
}

} // namespace egl::simd

#endif // __AVX2__
