#pragma once

// Dense double-precision inner loops used by the ridge and network code.
//
// Every kernel has a portable scalar reference in parted::simd::scalar and
// vectorised variants (AVX2+FMA on x86-64, NEON on aarch64). The public
// entry points dispatch once, at first use, to the widest variant the CPU
// supports. Setting PARTED_SIMD=scalar in the environment pins the scalar
// path, which is useful when comparing against other builds.

#include <cstddef>
#include <span>
#include <string_view>

namespace parted::simd {

enum class Backend { scalar, avx2, neon };

std::string_view backend_name(Backend backend);

/// True when the running CPU (and this build) can execute `backend`.
bool backend_supported(Backend backend);

/// Backend the public kernels currently dispatch to.
Backend active_backend();

/// Re-point dispatch. Throws std::invalid_argument for an unsupported backend.
void force_backend(Backend backend);

/// RAII guard restoring the previous backend; for tests.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend backend) : previous_(active_backend()) { force_backend(backend); }
  ~ScopedBackend() { force_backend(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

// Raw-pointer kernel signatures; each backend provides one of each.
using DotFn = double (*)(const double* a, const double* b, std::size_t n);
using AxpyFn = void (*)(double alpha, const double* x, double* y, std::size_t n);
using SumSquaresFn = double (*)(const double* x, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
}  // namespace neon
#endif

/// sum_i a[i] * b[i]. Spans must have equal length.
double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x. Spans must have equal length.
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// sum_i x[i]^2
double sum_squares(std::span<const double> x);

}  // namespace parted::simd
