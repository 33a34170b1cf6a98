#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "parted/simd/kernels.hpp"
#include "support.hpp"

using namespace parted;
using simd::Backend;

namespace {

std::vector<Backend> vector_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::avx2, Backend::neon})
    if (simd::backend_supported(b)) out.push_back(b);
  return out;
}

// Lengths around every unroll boundary plus a few larger ones.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 32, 33, 100, 257, 1000};

}  // namespace

TEST_CASE("scalar reference kernels against naive loops") {
  Rng rng(1);
  for (std::size_t n : kLengths) {
    const Vector a = test::random_vector(rng, n), b = test::random_vector(rng, n);
    long double dot = 0, ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += static_cast<long double>(a[i]) * b[i];
      ss += static_cast<long double>(a[i]) * a[i];
    }
    CHECK(simd::scalar::dot(a.data(), b.data(), n) == doctest::Approx(static_cast<double>(dot)).epsilon(1e-13));
    CHECK(simd::scalar::sum_squares(a.data(), n) == doctest::Approx(static_cast<double>(ss)).epsilon(1e-13));
    Vector y = b;
    simd::scalar::axpy(0.75, a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == b[i] + 0.75 * a[i]);
  }
}

TEST_CASE("vector backends match the scalar reference") {
  Rng rng(2);
  for (Backend backend : vector_backends()) {
    CAPTURE(simd::backend_name(backend));
    simd::ScopedBackend guard(backend);
    for (int rep = 0; rep < 20; ++rep) {
      for (std::size_t n : kLengths) {
        const Vector a = test::random_vector(rng, n), b = test::random_vector(rng, n);
        const double ref_dot = simd::scalar::dot(a.data(), b.data(), n);
        const double ref_ss = simd::scalar::sum_squares(a.data(), n);
        // Reassociated sums: compare relative to the sum of absolute terms.
        double abs_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) abs_sum += std::abs(a[i] * b[i]);
        CHECK(std::abs(simd::dot(a, b) - ref_dot) <= 1e-12 * std::max(1.0, abs_sum));
        CHECK(std::abs(simd::sum_squares(a) - ref_ss) <= 1e-12 * std::max(1.0, ref_ss));

        Vector y_ref = b, y = b;
        simd::scalar::axpy(-1.25, a.data(), y_ref.data(), n);
        simd::axpy(-1.25, a, y);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y[i] - y_ref[i]) <= 1e-15 * std::max(1.0, std::abs(y_ref[i])));
      }
    }
  }
}

TEST_CASE("unaligned views give the same result") {
  Rng rng(3);
  const Vector a = test::random_vector(rng, 103), b = test::random_vector(rng, 103);
  for (std::size_t off = 0; off < 4; ++off) {
    std::span<const double> sa(a.data() + off, 99), sb(b.data() + off, 99);
    const double ref = simd::scalar::dot(sa.data(), sb.data(), sa.size());
    CHECK(simd::dot(sa, sb) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("backend selection") {
  CHECK(simd::backend_supported(Backend::scalar));
  {
    simd::ScopedBackend guard(Backend::scalar);
    CHECK(simd::active_backend() == Backend::scalar);
  }
  for (Backend b : {Backend::avx2, Backend::neon}) {
    if (!simd::backend_supported(b)) CHECK_THROWS_AS(simd::force_backend(b), std::invalid_argument);
  }
  CHECK(simd::backend_name(Backend::scalar) == "scalar");
}

TEST_CASE("solver output is stable across backends") {
  // Whole-pipeline equivalence: a ridge solve on either backend agrees to rounding.
  Rng rng(4);
  const Matrix x = test::random_matrix(rng, 60, 23);
  const Vector y = test::random_vector(rng, 60);
  Vector ref;
  {
    simd::ScopedBackend guard(Backend::scalar);
    ref = ridge_fit(x, y, 1.0).solution;
  }
  for (Backend backend : vector_backends()) {
    simd::ScopedBackend guard(backend);
    const Vector got = ridge_fit(x, y, 1.0).solution;
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-11));
  }
}
