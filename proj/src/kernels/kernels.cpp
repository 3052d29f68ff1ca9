#include "stackkit/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace stackkit::kernels {

namespace scalar {

double sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double sum_sq_dev(const double* x, std::size_t n, double center) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = x[i] - center;
    s += d * d;
  }
  return s;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t count_ge(const double* x, std::size_t n, double bound) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += x[i] >= bound ? 1 : 0;
  return c;
}

std::size_t count_in_range(const std::uint64_t* x, std::size_t n,
                           std::uint64_t lo, std::uint64_t hi) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += (x[i] >= lo && x[i] < hi) ? 1 : 0;
  return c;
}

void shift_right(const std::uint64_t* in, std::uint64_t* out, std::size_t n,
                 unsigned shift) {
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] >> shift;
}

}  // namespace scalar

#if !defined(STACKKIT_HAVE_AVX2)
namespace avx2 {

double sum(const double* x, std::size_t n) { return scalar::sum(x, n); }

double sum_sq_dev(const double* x, std::size_t n, double center) {
  return scalar::sum_sq_dev(x, n, center);
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  return scalar::sum_sq_diff(a, b, n);
}

std::size_t count_ge(const double* x, std::size_t n, double bound) {
  return scalar::count_ge(x, n, bound);
}

std::size_t count_in_range(const std::uint64_t* x, std::size_t n,
                           std::uint64_t lo, std::uint64_t hi) {
  return scalar::count_in_range(x, n, lo, hi);
}

void shift_right(const std::uint64_t* in, std::uint64_t* out, std::size_t n,
                 unsigned shift) {
  scalar::shift_right(in, out, n, shift);
}

}  // namespace avx2
#endif

bool avx2_supported() {
#if defined(STACKKIT_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

namespace {

Isa detect_isa() { return avx2_supported() ? Isa::avx2 : Isa::scalar; }

std::atomic<Isa>& isa_slot() {
  static std::atomic<Isa> slot{detect_isa()};
  return slot;
}

}  // namespace

Isa active_isa() { return isa_slot().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_supported())
    throw std::runtime_error("avx2 not supported on this cpu/build");
  isa_slot().store(isa, std::memory_order_relaxed);
}

void reset_isa() { isa_slot().store(detect_isa(), std::memory_order_relaxed); }

double sum(const double* x, std::size_t n) {
  return active_isa() == Isa::avx2 ? avx2::sum(x, n) : scalar::sum(x, n);
}

double sum_sq_dev(const double* x, std::size_t n, double center) {
  return active_isa() == Isa::avx2 ? avx2::sum_sq_dev(x, n, center)
                                   : scalar::sum_sq_dev(x, n, center);
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  return active_isa() == Isa::avx2 ? avx2::sum_sq_diff(a, b, n)
                                   : scalar::sum_sq_diff(a, b, n);
}

std::size_t count_ge(const double* x, std::size_t n, double bound) {
  return active_isa() == Isa::avx2 ? avx2::count_ge(x, n, bound)
                                   : scalar::count_ge(x, n, bound);
}

std::size_t count_in_range(const std::uint64_t* x, std::size_t n,
                           std::uint64_t lo, std::uint64_t hi) {
  return active_isa() == Isa::avx2 ? avx2::count_in_range(x, n, lo, hi)
                                   : scalar::count_in_range(x, n, lo, hi);
}

void shift_right(const std::uint64_t* in, std::uint64_t* out, std::size_t n,
                 unsigned shift) {
  if (active_isa() == Isa::avx2)
    avx2::shift_right(in, out, n, shift);
  else
    scalar::shift_right(in, out, n, shift);
}

}  // namespace stackkit::kernels
