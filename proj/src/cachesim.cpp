#include "stackkit/cachesim.hpp"

#include <list>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "stackkit/kernels.hpp"

namespace stackkit {

SimResult simulate_lru(const AccessSequence& seq, std::uint64_t line_size,
                       std::uint64_t capacity_lines,
                       std::vector<AccessOutcome>* events) {
  if (capacity_lines == 0)
    throw std::invalid_argument("simulate_lru: capacity must be >= 1 line");
  auto lines = to_line_addresses(seq, line_size);
  SimResult r;
  r.accesses = lines.size();
  if (events) {
    events->clear();
    events->reserve(lines.size());
  }
  std::list<std::uint64_t> lru;  // front = MRU
  std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator> where;
  std::unordered_set<std::uint64_t> ever_seen;
  where.reserve(capacity_lines * 2 + 16);
  for (auto line : lines) {
    AccessOutcome outcome;
    auto it = where.find(line);
    if (it != where.end()) {
      outcome = AccessOutcome::hit;
      ++r.hits;
      lru.splice(lru.begin(), lru, it->second);
    } else {
      bool first_touch = ever_seen.insert(line).second;
      outcome = first_touch ? AccessOutcome::compulsory_miss
                            : AccessOutcome::capacity_miss;
      if (first_touch)
        ++r.compulsory_misses;
      else
        ++r.capacity_misses;
      if (lru.size() == capacity_lines) {
        where.erase(lru.back());
        lru.pop_back();
      }
      lru.push_front(line);
      where[line] = lru.begin();
    }
    if (events) events->push_back(outcome);
  }
  return r;
}

SimResult simulate_lru(const AccessSequence& seq, const CacheConfig& cache) {
  cache.validate();
  return simulate_lru(seq, cache.line_size, cache.capacity_lines());
}

double empirical_miss_ratio(const DistanceSequence& d,
                            std::uint64_t capacity_lines) {
  const std::size_t n = d.distances.size();
  // kCold is the largest u64, so [x, kCold) range counts exclude cold
  // entries by construction.
  std::uint64_t finite = kernels::count_in_range(d.distances.data(), n, 0, kCold);
  std::uint64_t missed =
      kernels::count_in_range(d.distances.data(), n, capacity_lines, kCold);
  if (finite == 0)
    throw std::invalid_argument("empirical_miss_ratio: no finite distances");
  return static_cast<double>(missed) / static_cast<double>(finite);
}

}  // namespace stackkit
