#include <immintrin.h>

#include "stackkit/kernels.hpp"

// AVX2 variants. 4-wide double / 64-bit lanes with scalar remainder loops.
// Unsigned 64-bit comparisons flip the sign bit and use the signed compare.

namespace stackkit::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

}  // namespace

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double sum_sq_dev(const double* x, std::size_t n, double center) {
  const __m256d c = _mm256_set1_pd(center);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), c);
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    double d = x[i] - center;
    s += d * d;
  }
  return s;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t count_ge(const double* x, std::size_t n, double bound) {
  const __m256d b = _mm256_set1_pd(bound);
  std::size_t c = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d cmp = _mm256_cmp_pd(_mm256_loadu_pd(x + i), b, _CMP_GE_OQ);
    c += static_cast<unsigned>(__builtin_popcount(_mm256_movemask_pd(cmp)));
  }
  for (; i < n; ++i) c += x[i] >= bound ? 1 : 0;
  return c;
}

std::size_t count_in_range(const std::uint64_t* x, std::size_t n,
                           std::uint64_t lo, std::uint64_t hi) {
  const __m256i bias = _mm256_set1_epi64x(static_cast<long long>(1ull << 63));
  const __m256i lo_s = _mm256_xor_si256(
      _mm256_set1_epi64x(static_cast<long long>(lo)), bias);
  const __m256i hi_s = _mm256_xor_si256(
      _mm256_set1_epi64x(static_cast<long long>(hi)), bias);
  std::size_t c = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x + i));
    __m256i vs = _mm256_xor_si256(v, bias);
    __m256i in = _mm256_andnot_si256(_mm256_cmpgt_epi64(lo_s, vs),
                                     _mm256_cmpgt_epi64(hi_s, vs));
    int mask = _mm256_movemask_pd(_mm256_castsi256_pd(in));
    c += static_cast<unsigned>(__builtin_popcount(mask));
  }
  for (; i < n; ++i) c += (x[i] >= lo && x[i] < hi) ? 1 : 0;
  return c;
}

void shift_right(const std::uint64_t* in, std::uint64_t* out, std::size_t n,
                 unsigned shift) {
  const __m128i count = _mm_cvtsi32_si128(static_cast<int>(shift));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(in + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i),
                        _mm256_srl_epi64(v, count));
  }
  for (; i < n; ++i) out[i] = in[i] >> shift;
}

}  // namespace stackkit::kernels::avx2
