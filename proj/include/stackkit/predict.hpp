#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "stackkit/cache.hpp"
#include "stackkit/characterize.hpp"
#include "stackkit/stackdist.hpp"

namespace stackkit {

struct PredictionResult {
  double capacity_miss_ratio = 0.0;
  std::uint64_t capacity_lines = 0;
  std::uint64_t line_size = 0;
  // Capacity below the characterization's refinement floor: the model was
  // deliberately not tuned there, so the number is unsupported.
  bool below_threshold = false;
};

// P(distance >= C) under the mixture: atoms at or above C plus the
// continuous tail. O(#atoms), independent of trace length.
PredictionResult miss_ratio_at_lines(const Characterization& c,
                                     std::uint64_t capacity_lines);

// Same, with the capacity taken from a byte-sized cache whose line size
// must match the characterization.
PredictionResult miss_ratio(const Characterization& c,
                            const CacheConfig& cache);

// Mixture cdf P(distance <= x); exposed for validation.
double mixture_cdf(const Characterization& c, double x);

// miss_ratio at every power-of-two cache size in [cs_min, cs_max] bytes.
std::vector<std::pair<std::uint64_t, double>> sweep(const Characterization& c,
                                                    std::uint64_t cs_min,
                                                    std::uint64_t cs_max);

// n mixture draws sorted descending, comparable to an empirical Outline.
Outline monte_carlo_outline(const Characterization& c, std::size_t n,
                            std::uint64_t seed);

// Max absolute miss-ratio difference over the shared sweep grid; a scalar
// measure of behavior drift between two characterizations.
double divergence(const Characterization& a, const Characterization& b,
                  std::uint64_t cs_min, std::uint64_t cs_max);

// CSV emitters for external plotting.
void write_sweep_csv(const std::vector<std::pair<std::uint64_t, double>>& rows,
                     std::ostream& out);
void write_outline_csv(const Outline& o, std::ostream& out);
void write_outline_csv(const Outline& empirical, const Outline& model,
                       std::ostream& out);

}  // namespace stackkit
