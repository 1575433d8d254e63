#pragma once

// Array reduction kernels used by the quadrature and scan paths.
//
// Every kernel has a scalar reference implementation and an AVX2 variant;
// the active backend is chosen at runtime (cpuid), overridable through the
// THRESHOLDLAB_SIMD environment variable ("scalar", "avx2", "auto") or
// force_backend(). The AVX2 variants reassociate sums, so results may differ
// from the scalar path by a few ulps; the equivalence tests pin the allowed
// deviation.

#include <cstddef>
#include <span>

namespace thresh::kernels {

enum class Backend { Auto, Scalar, Avx2 };

// Selects the backend for all subsequent kernel calls. Auto re-runs detection.
void force_backend(Backend b);
Backend active_backend();
const char* backend_name();
bool avx2_supported();

// sum_i x[i]
double sum(std::span<const double> x);

// sum_i x[i]*y[i]
double dot(std::span<const double> x, std::span<const double> y);

// Trapezoid rule on the (possibly nonuniform) nodes r: integral of f dr.
double trapezoid(std::span<const double> r, std::span<const double> f);

// Trapezoid rule for integral of u^2 dr.
double trapezoid_sq(std::span<const double> r, std::span<const double> u);

// Trapezoid rule for integral of w * u^2 dr.
double trapezoid_sq_weighted(std::span<const double> r, std::span<const double> u,
                             std::span<const double> w);

struct MinResult {
    double value;
    std::size_t index;
};

// Minimum of a[i] - b[i] and the index where it occurs. Sizes must match and
// be nonzero.
MinResult min_difference(std::span<const double> a, std::span<const double> b);

// max_i |a[i] - b[i]| / max(|b[i]|, floor)
double max_rel_deviation(std::span<const double> a, std::span<const double> b, double floor);

// x[i] *= c
void scale(std::span<double> x, double c);

namespace detail {
// Reference implementations, exposed so the equivalence tests can pin the
// SIMD variants against them regardless of the active backend.
double sum_scalar(const double* x, std::size_t n);
double dot_scalar(const double* x, const double* y, std::size_t n);
double trapezoid_scalar(const double* r, const double* f, std::size_t n);
double trapezoid_sq_scalar(const double* r, const double* u, std::size_t n);
double trapezoid_sq_weighted_scalar(const double* r, const double* u, const double* w,
                                    std::size_t n);
MinResult min_difference_scalar(const double* a, const double* b, std::size_t n);
double max_rel_deviation_scalar(const double* a, const double* b, std::size_t n, double floor);
void scale_scalar(double* x, std::size_t n, double c);

#if defined(__x86_64__) || defined(_M_X64)
double sum_avx2(const double* x, std::size_t n);
double dot_avx2(const double* x, const double* y, std::size_t n);
double trapezoid_avx2(const double* r, const double* f, std::size_t n);
double trapezoid_sq_avx2(const double* r, const double* u, std::size_t n);
double trapezoid_sq_weighted_avx2(const double* r, const double* u, const double* w,
                                  std::size_t n);
MinResult min_difference_avx2(const double* a, const double* b, std::size_t n);
double max_rel_deviation_avx2(const double* a, const double* b, std::size_t n, double floor);
void scale_avx2(double* x, std::size_t n, double c);
#endif
} // namespace detail

} // namespace thresh::kernels
