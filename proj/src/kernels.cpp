#include "thresh/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace thresh::kernels {

namespace {

Backend g_requested = Backend::Auto;

bool detect_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend resolve() {
    if (g_requested != Backend::Auto) return g_requested;
    if (const char* env = std::getenv("THRESHOLDLAB_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0) return Backend::Avx2;
    }
    return detect_avx2() ? Backend::Avx2 : Backend::Scalar;
}

Backend g_active = resolve();

} // namespace

bool avx2_supported() { return detect_avx2(); }

void force_backend(Backend b) {
    if (b == Backend::Avx2 && !detect_avx2())
        throw std::runtime_error("kernels: AVX2 backend requested but not supported by this CPU");
    g_requested = b;
    g_active = resolve();
}

Backend active_backend() { return g_active; }

const char* backend_name() { return g_active == Backend::Avx2 ? "avx2" : "scalar"; }

using namespace detail;

#if defined(__x86_64__) || defined(_M_X64)
#define THRESH_DISPATCH(fn, ...) \
    return g_active == Backend::Avx2 ? fn##_avx2(__VA_ARGS__) : fn##_scalar(__VA_ARGS__)
#else
#define THRESH_DISPATCH(fn, ...) return fn##_scalar(__VA_ARGS__)
#endif

double sum(std::span<const double> x) { THRESH_DISPATCH(sum, x.data(), x.size()); }

double dot(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("kernels::dot: size mismatch");
    THRESH_DISPATCH(dot, x.data(), y.data(), x.size());
}

double trapezoid(std::span<const double> r, std::span<const double> f) {
    if (r.size() != f.size()) throw std::invalid_argument("kernels::trapezoid: size mismatch");
    THRESH_DISPATCH(trapezoid, r.data(), f.data(), r.size());
}

double trapezoid_sq(std::span<const double> r, std::span<const double> u) {
    if (r.size() != u.size()) throw std::invalid_argument("kernels::trapezoid_sq: size mismatch");
    THRESH_DISPATCH(trapezoid_sq, r.data(), u.data(), r.size());
}

double trapezoid_sq_weighted(std::span<const double> r, std::span<const double> u,
                             std::span<const double> w) {
    if (r.size() != u.size() || r.size() != w.size())
        throw std::invalid_argument("kernels::trapezoid_sq_weighted: size mismatch");
    THRESH_DISPATCH(trapezoid_sq_weighted, r.data(), u.data(), w.data(), r.size());
}

MinResult min_difference(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("kernels::min_difference: bad sizes");
    THRESH_DISPATCH(min_difference, a.data(), b.data(), a.size());
}

double max_rel_deviation(std::span<const double> a, std::span<const double> b, double floor) {
    if (a.size() != b.size())
        throw std::invalid_argument("kernels::max_rel_deviation: size mismatch");
    THRESH_DISPATCH(max_rel_deviation, a.data(), b.data(), a.size(), floor);
}

void scale(std::span<double> x, double c) {
#if defined(__x86_64__) || defined(_M_X64)
    if (g_active == Backend::Avx2) {
        scale_avx2(x.data(), x.size(), c);
        return;
    }
#endif
    scale_scalar(x.data(), x.size(), c);
}

} // namespace thresh::kernels
