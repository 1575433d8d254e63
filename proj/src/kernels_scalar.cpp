#include "thresh/kernels.hpp"

#include <cmath>

namespace thresh::kernels::detail {

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double trapezoid_scalar(const double* r, const double* f, std::size_t n) {
    if (n < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) acc += (r[i + 1] - r[i]) * (f[i] + f[i + 1]);
    return 0.5 * acc;
}

double trapezoid_sq_scalar(const double* r, const double* u, std::size_t n) {
    if (n < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        acc += (r[i + 1] - r[i]) * (u[i] * u[i] + u[i + 1] * u[i + 1]);
    return 0.5 * acc;
}

double trapezoid_sq_weighted_scalar(const double* r, const double* u, const double* w,
                                    std::size_t n) {
    if (n < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        acc += (r[i + 1] - r[i]) * (w[i] * u[i] * u[i] + w[i + 1] * u[i + 1] * u[i + 1]);
    return 0.5 * acc;
}

MinResult min_difference_scalar(const double* a, const double* b, std::size_t n) {
    MinResult res{a[0] - b[0], 0};
    for (std::size_t i = 1; i < n; ++i) {
        const double d = a[i] - b[i];
        if (d < res.value) {
            res.value = d;
            res.index = i;
        }
    }
    return res;
}

double max_rel_deviation_scalar(const double* a, const double* b, std::size_t n, double floor) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double den = std::max(std::fabs(b[i]), floor);
        const double d = std::fabs(a[i] - b[i]) / den;
        if (d > worst) worst = d;
    }
    return worst;
}

void scale_scalar(double* x, std::size_t n, double c) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= c;
}

} // namespace thresh::kernels::detail
