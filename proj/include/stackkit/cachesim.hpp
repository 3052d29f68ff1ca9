#pragma once

#include <cstdint>
#include <vector>

#include "stackkit/cache.hpp"
#include "stackkit/stackdist.hpp"
#include "stackkit/trace.hpp"

namespace stackkit {

enum class AccessOutcome : std::uint8_t { hit, compulsory_miss, capacity_miss };

struct SimResult {
  std::uint64_t accesses = 0;
  std::uint64_t hits = 0;
  std::uint64_t compulsory_misses = 0;
  std::uint64_t capacity_misses = 0;
};

// Fully-associative LRU over line addresses: resident access hits and moves
// to MRU; first-ever touch is a compulsory miss; any other non-resident
// access is a capacity miss and evicts the LRU line once the set is full.
// When events is non-null it receives one outcome per access.
SimResult simulate_lru(const AccessSequence& seq, std::uint64_t line_size,
                       std::uint64_t capacity_lines,
                       std::vector<AccessOutcome>* events = nullptr);

SimResult simulate_lru(const AccessSequence& seq, const CacheConfig& cache);

// Fraction of finite distances >= capacity (compulsory excluded). Throws
// when no finite distance exists.
double empirical_miss_ratio(const DistanceSequence& d,
                            std::uint64_t capacity_lines);

}  // namespace stackkit
