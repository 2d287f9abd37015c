#include "ttscale/simd.hpp"

#include "ttscale/error.hpp"

namespace ttscale::simd {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* x, const double* y, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
#endif
#if defined(__aarch64__)
double dot_neon(const double* x, const double* y, std::size_t n);
void axpy_neon(double a, const double* x, double* y, std::size_t n);
#endif

Backend detected_backend() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Backend::avx2;
#elif defined(__aarch64__)
    return Backend::neon;
#endif
    return Backend::scalar;
}

namespace {
Backend g_active = detected_backend();
}

Backend active_backend() { return g_active; }

void set_backend(Backend b) {
    switch (b) {
        case Backend::scalar:
            break;
        case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            if (detected_backend() == Backend::avx2) break;
#endif
            fail("simd", "avx2 backend not available on this CPU");
        case Backend::neon:
#if defined(__aarch64__)
            break;
#else
            fail("simd", "neon backend not available on this CPU");
#endif
    }
    g_active = b;
}

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "?";
}

double dot(const double* x, const double* y, std::size_t n) {
    switch (g_active) {
#if defined(__x86_64__) || defined(_M_X64)
        case Backend::avx2: return dot_avx2(x, y, n);
#endif
#if defined(__aarch64__)
        case Backend::neon: return dot_neon(x, y, n);
#endif
        default: return dot_scalar(x, y, n);
    }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    switch (g_active) {
#if defined(__x86_64__) || defined(_M_X64)
        case Backend::avx2: axpy_avx2(a, x, y, n); return;
#endif
#if defined(__aarch64__)
        case Backend::neon: axpy_neon(a, x, y, n); return;
#endif
        default: axpy_scalar(a, x, y, n); return;
    }
}

}  // namespace ttscale::simd
