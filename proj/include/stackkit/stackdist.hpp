#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "stackkit/trace.hpp"

namespace stackkit {

// First-touch marker: no previous access to the line, distance unbounded.
inline constexpr std::uint64_t kCold = std::numeric_limits<std::uint64_t>::max();

// One distance per access, in trace order, kCold on first touch.
struct DistanceSequence {
  std::vector<std::uint64_t> distances;
};

// Finite distances kept for fitting, plus the provenance needed to interpret
// them: line granularity, how sparsely they were taken, which stream they
// came from, and the ordinal window they cover.
struct SampleSet {
  std::vector<double> samples;  // line units, finite, >= 0
  std::uint64_t line_size = 64;
  std::uint64_t sampling_interval = 1;
  AccessKind source_kind = AccessKind::data;
  std::uint64_t window_begin = 0;
  std::uint64_t window_end = 0;
};

// A sample set re-plotted in descending order.
struct Outline {
  std::vector<double> values;
};

// floor(address / line_size) for every address; order preserved.
// line_size must be a power of two.
std::vector<std::uint64_t> to_line_addresses(const AccessSequence& seq,
                                             std::uint64_t line_size);

// Stack distance per access: distinct lines touched strictly between an
// access and the previous access to the same line. O(N log M) via an
// order-maintenance tree with subtree counts keyed by last-access time.
DistanceSequence compute_distances(std::span<const std::uint64_t> lines);

// Same contract, O(N^2): literally collects the set of lines between
// reuses. The oracle the fast engine is tested against.
DistanceSequence compute_distances_bruteforce(std::span<const std::uint64_t> lines);

// Keeps finite distances at access ordinals congruent to offset modulo
// interval, restricted to [window_begin, window_end) when window_end > 0.
// Cold entries at sampled ordinals contribute nothing.
SampleSet sample_distances(const DistanceSequence& d, std::uint64_t interval,
                           std::uint64_t offset, std::uint64_t line_size,
                           AccessKind kind = AccessKind::data,
                           std::uint64_t window_begin = 0,
                           std::uint64_t window_end = 0);

Outline make_outline(const SampleSet& s);

// (cold count, total count); cold count equals distinct lines touched.
std::pair<std::uint64_t, std::uint64_t> cold_stats(const DistanceSequence& d);

// CSV with header `# line_size=<n> interval=<n> kind=<i|d> window=<a>:<b>`,
// one distance per line, trace order.
void write_samples_csv(const SampleSet& s, std::ostream& out);
SampleSet read_samples_csv(std::istream& in);

}  // namespace stackkit
