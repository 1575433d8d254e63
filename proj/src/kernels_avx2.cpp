#include "thresh/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

// Per-function target attributes so this TU builds without global -mavx2;
// dispatch guarantees these are only called on AVX2+FMA hardware.
#define THRESH_AVX2 __attribute__((target("avx2,fma")))

namespace thresh::kernels::detail {

namespace {

THRESH_AVX2 inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

THRESH_AVX2 inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

} // namespace

THRESH_AVX2 double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double res = hsum(acc);
    for (; i < n; ++i) res += x[i];
    return res;
}

THRESH_AVX2 double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double res = hsum(acc);
    for (; i < n; ++i) res += x[i] * y[i];
    return res;
}

THRESH_AVX2 double trapezoid_avx2(const double* r, const double* f, std::size_t n) {
    if (n < 2) return 0.0;
    const std::size_t m = n - 1;
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const __m256d dr = _mm256_sub_pd(_mm256_loadu_pd(r + i + 1), _mm256_loadu_pd(r + i));
        const __m256d fs = _mm256_add_pd(_mm256_loadu_pd(f + i), _mm256_loadu_pd(f + i + 1));
        acc = _mm256_fmadd_pd(dr, fs, acc);
    }
    double res = hsum(acc);
    for (; i < m; ++i) res += (r[i + 1] - r[i]) * (f[i] + f[i + 1]);
    return 0.5 * res;
}

THRESH_AVX2 double trapezoid_sq_avx2(const double* r, const double* u, std::size_t n) {
    if (n < 2) return 0.0;
    const std::size_t m = n - 1;
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const __m256d dr = _mm256_sub_pd(_mm256_loadu_pd(r + i + 1), _mm256_loadu_pd(r + i));
        const __m256d u0 = _mm256_loadu_pd(u + i);
        const __m256d u1 = _mm256_loadu_pd(u + i + 1);
        const __m256d fs = _mm256_fmadd_pd(u1, u1, _mm256_mul_pd(u0, u0));
        acc = _mm256_fmadd_pd(dr, fs, acc);
    }
    double res = hsum(acc);
    for (; i < m; ++i) res += (r[i + 1] - r[i]) * (u[i] * u[i] + u[i + 1] * u[i + 1]);
    return 0.5 * res;
}

THRESH_AVX2 double trapezoid_sq_weighted_avx2(const double* r, const double* u, const double* w,
                                              std::size_t n) {
    if (n < 2) return 0.0;
    const std::size_t m = n - 1;
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const __m256d dr = _mm256_sub_pd(_mm256_loadu_pd(r + i + 1), _mm256_loadu_pd(r + i));
        const __m256d u0 = _mm256_loadu_pd(u + i);
        const __m256d u1 = _mm256_loadu_pd(u + i + 1);
        const __m256d w0 = _mm256_loadu_pd(w + i);
        const __m256d w1 = _mm256_loadu_pd(w + i + 1);
        const __m256d fs = _mm256_fmadd_pd(w1, _mm256_mul_pd(u1, u1),
                                           _mm256_mul_pd(w0, _mm256_mul_pd(u0, u0)));
        acc = _mm256_fmadd_pd(dr, fs, acc);
    }
    double res = hsum(acc);
    for (; i < m; ++i)
        res += (r[i + 1] - r[i]) * (w[i] * u[i] * u[i] + w[i + 1] * u[i + 1] * u[i + 1]);
    return 0.5 * res;
}

THRESH_AVX2 MinResult min_difference_avx2(const double* a, const double* b, std::size_t n) {
    MinResult res{a[0] - b[0], 0};
    std::size_t i = 0;
    if (n >= 8) {
        __m256d vmin = _mm256_set1_pd(res.value);
        __m256i vidx = _mm256_setzero_si256();
        __m256i idx = _mm256_setr_epi64x(0, 1, 2, 3);
        const __m256i step = _mm256_set1_epi64x(4);
        for (; i + 4 <= n; i += 4) {
            const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
            const __m256d lt = _mm256_cmp_pd(d, vmin, _CMP_LT_OQ);
            vmin = _mm256_blendv_pd(vmin, d, lt);
            vidx = _mm256_blendv_epi8(vidx, idx, _mm256_castpd_si256(lt));
            idx = _mm256_add_epi64(idx, step);
        }
        alignas(32) double vals[4];
        alignas(32) long long idxs[4];
        _mm256_store_pd(vals, vmin);
        _mm256_store_si256(reinterpret_cast<__m256i*>(idxs), vidx);
        for (int lane = 0; lane < 4; ++lane) {
            // Ties resolve to the lowest index, matching the scalar scan.
            if (vals[lane] < res.value ||
                (vals[lane] == res.value && static_cast<std::size_t>(idxs[lane]) < res.index)) {
                res.value = vals[lane];
                res.index = static_cast<std::size_t>(idxs[lane]);
            }
        }
    }
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        if (d < res.value) {
            res.value = d;
            res.index = i;
        }
    }
    return res;
}

THRESH_AVX2 double max_rel_deviation_avx2(const double* a, const double* b, std::size_t n,
                                          double floor) {
    const __m256d vfloor = _mm256_set1_pd(floor);
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d vmax = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d av = _mm256_loadu_pd(a + i);
        const __m256d bv = _mm256_loadu_pd(b + i);
        const __m256d num = _mm256_andnot_pd(sign_mask, _mm256_sub_pd(av, bv));
        const __m256d den = _mm256_max_pd(_mm256_andnot_pd(sign_mask, bv), vfloor);
        vmax = _mm256_max_pd(vmax, _mm256_div_pd(num, den));
    }
    double worst = hmax(vmax);
    for (; i < n; ++i) {
        const double den = std::max(std::fabs(b[i]), floor);
        const double d = std::fabs(a[i] - b[i]) / den;
        if (d > worst) worst = d;
    }
    return worst;
}

THRESH_AVX2 void scale_avx2(double* x, std::size_t n, double c) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vc));
    for (; i < n; ++i) x[i] *= c;
}

} // namespace thresh::kernels::detail

#endif // x86_64
