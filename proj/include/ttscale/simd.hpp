#pragma once

// Small double-precision kernels behind runtime CPU dispatch.
// Scalar reference implementations always exist; AVX2 (x86-64) and NEON
// (aarch64) variants are selected at startup when the CPU supports them.
// The backend can be pinned explicitly, which the equivalence tests use to
// compare vector paths against the scalar reference.

#include <cstddef>
#include <string>

namespace ttscale::simd {

enum class Backend { scalar, avx2, neon };

// Backend detected for this process (scalar if nothing better is available).
Backend detected_backend();

// Currently active backend. Defaults to detected_backend().
Backend active_backend();

// Pins the backend; throws if the requested backend is not available on this
// CPU. Not synchronized: call before spawning workers.
void set_backend(Backend b);

const char* backend_name(Backend b);

// sum_i x[i] * y[i]
double dot(const double* x, const double* y, std::size_t n);

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

// Scalar reference paths (used directly by equivalence tests).
double dot_scalar(const double* x, const double* y, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);

}  // namespace ttscale::simd
