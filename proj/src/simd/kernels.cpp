#include "parted/simd/kernels.hpp"

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace parted::simd {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_squares(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

}  // namespace scalar

namespace {

struct KernelTable {
  Backend backend;
  DotFn dot;
  AxpyFn axpy;
  SumSquaresFn sum_squares;
};

constexpr KernelTable kScalarTable{Backend::scalar, &scalar::dot, &scalar::axpy, &scalar::sum_squares};

#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2Table{Backend::avx2, &avx2::dot, &avx2::axpy, &avx2::sum_squares};
#endif
#if defined(__aarch64__)
constexpr KernelTable kNeonTable{Backend::neon, &neon::dot, &neon::axpy, &neon::sum_squares};
#endif

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return &kScalarTable;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return &kAvx2Table;
#else
      return nullptr;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable* detect() {
  if (const char* env = std::getenv("PARTED_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return &kScalarTable;
  }
  if (backend_supported(Backend::avx2)) return table_for(Backend::avx2);
  if (backend_supported(Backend::neon)) return table_for(Backend::neon);
  return &kScalarTable;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

bool backend_supported(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() { return current().load(std::memory_order_acquire)->backend; }

void force_backend(Backend backend) {
  if (!backend_supported(backend)) {
    throw std::invalid_argument("SIMD backend not supported on this CPU: " + std::string(backend_name(backend)));
  }
  current().store(table_for(backend), std::memory_order_release);
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return current().load(std::memory_order_relaxed)->dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  current().load(std::memory_order_relaxed)->axpy(alpha, x.data(), y.data(), x.size());
}

double sum_squares(std::span<const double> x) {
  return current().load(std::memory_order_relaxed)->sum_squares(x.data(), x.size());
}

}  // namespace parted::simd
