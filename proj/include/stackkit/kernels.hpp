#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel primitives used by the analysis loops: moment accumulation,
// quantile-grid squared error, tail counting, and address-to-line folding.
// Each kernel has a scalar reference implementation and, on x86-64 builds, an
// AVX2 variant. The dispatch layer picks the widest supported variant at
// runtime; tests exercise both through the per-ISA namespaces.
//
// Integer kernels agree bit-for-bit across variants. Floating-point
// reductions may differ in the final bits because vector lanes reorder the
// additions.

namespace stackkit::kernels {

enum class Isa { scalar, avx2 };

double sum(const double* x, std::size_t n);
double sum_sq_dev(const double* x, std::size_t n, double center);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
std::size_t count_ge(const double* x, std::size_t n, double bound);
std::size_t count_in_range(const std::uint64_t* x, std::size_t n,
                           std::uint64_t lo, std::uint64_t hi);
void shift_right(const std::uint64_t* in, std::uint64_t* out, std::size_t n,
                 unsigned shift);

// Variant currently routed to by the top-level entry points.
Isa active_isa();

// True when the CPU and the build both support AVX2.
bool avx2_supported();

// Pins dispatch to one variant. Requesting avx2 without support throws.
// Intended for equivalence tests and benchmarking.
void force_isa(Isa isa);
void reset_isa();

namespace scalar {
double sum(const double* x, std::size_t n);
double sum_sq_dev(const double* x, std::size_t n, double center);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
std::size_t count_ge(const double* x, std::size_t n, double bound);
std::size_t count_in_range(const std::uint64_t* x, std::size_t n,
                           std::uint64_t lo, std::uint64_t hi);
void shift_right(const std::uint64_t* in, std::uint64_t* out, std::size_t n,
                 unsigned shift);
}  // namespace scalar

// Defined on every build; falls back to the scalar implementation when the
// binary was compiled without AVX2 so callers can link unconditionally.
namespace avx2 {
double sum(const double* x, std::size_t n);
double sum_sq_dev(const double* x, std::size_t n, double center);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
std::size_t count_ge(const double* x, std::size_t n, double bound);
std::size_t count_in_range(const std::uint64_t* x, std::size_t n,
                           std::uint64_t lo, std::uint64_t hi);
void shift_right(const std::uint64_t* in, std::uint64_t* out, std::size_t n,
                 unsigned shift);
}  // namespace avx2

}  // namespace stackkit::kernels
