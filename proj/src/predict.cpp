#include "stackkit/predict.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace stackkit {

namespace {

// Mass of discrete atoms at or above capacity. Uses the integer tallies
// when the component carries them so that weight * probability reproduces
// count / total with a single rounding.
double discrete_tail(const DiscreteComponent& d, std::uint64_t capacity) {
  if (!d.counts.empty() && d.source_total > 0) {
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < d.atoms.size(); ++i)
      if (d.atoms[i].value >= capacity) count += d.counts[i];
    return static_cast<double>(count) / static_cast<double>(d.source_total);
  }
  double tail = 0.0;
  for (const auto& atom : d.atoms)
    if (atom.value >= capacity) tail += atom.probability;
  return tail * d.total_weight;
}

}  // namespace

PredictionResult miss_ratio_at_lines(const Characterization& c,
                                     std::uint64_t capacity_lines) {
  if (capacity_lines == 0)
    throw std::invalid_argument("miss_ratio: capacity must be >= 1 line");
  PredictionResult r;
  r.capacity_lines = capacity_lines;
  r.line_size = c.line_size;
  r.below_threshold = capacity_lines < c.threshold_lines;
  double tail = discrete_tail(c.discrete, capacity_lines);
  if (c.continuous)
    tail += c.continuous_weight *
            (1.0 - cdf(*c.continuous, static_cast<double>(capacity_lines)));
  r.capacity_miss_ratio = std::clamp(tail, 0.0, 1.0);
  return r;
}

PredictionResult miss_ratio(const Characterization& c,
                            const CacheConfig& cache) {
  cache.validate();
  if (cache.line_size != c.line_size)
    throw std::invalid_argument(
        "miss_ratio: cache line_size differs from characterization; "
        "cross-line-size prediction is not supported");
  return miss_ratio_at_lines(c, cache.capacity_lines());
}

double mixture_cdf(const Characterization& c, double x) {
  double mass = 0.0;
  if (!c.discrete.counts.empty() && c.discrete.source_total > 0) {
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < c.discrete.atoms.size(); ++i)
      if (static_cast<double>(c.discrete.atoms[i].value) <= x)
        count += c.discrete.counts[i];
    mass = static_cast<double>(count) /
           static_cast<double>(c.discrete.source_total);
  } else {
    for (const auto& atom : c.discrete.atoms)
      if (static_cast<double>(atom.value) <= x) mass += atom.probability;
    mass *= c.discrete.total_weight;
  }
  if (c.continuous) mass += c.continuous_weight * cdf(*c.continuous, x);
  return std::clamp(mass, 0.0, 1.0);
}

std::vector<std::pair<std::uint64_t, double>> sweep(const Characterization& c,
                                                    std::uint64_t cs_min,
                                                    std::uint64_t cs_max) {
  if (cs_min > cs_max)
    throw std::invalid_argument("sweep: cs_min must be <= cs_max");
  CacheConfig probe{cs_min, c.line_size};
  probe.validate();
  std::vector<std::pair<std::uint64_t, double>> rows;
  for (std::uint64_t cs = cs_min; cs <= cs_max && cs >= cs_min; cs <<= 1) {
    CacheConfig cache{cs, c.line_size};
    rows.emplace_back(cs, miss_ratio(c, cache).capacity_miss_ratio);
  }
  return rows;
}

Outline monte_carlo_outline(const Characterization& c, std::size_t n,
                            std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("monte_carlo_outline: n must be >= 1");
  Rng rng(seed);
  Outline o;
  o.values.resize(n);
  for (auto& v : o.values) v = sample_mixture(c, rng);
  std::sort(o.values.begin(), o.values.end(), std::greater<double>());
  return o;
}

double divergence(const Characterization& a, const Characterization& b,
                  std::uint64_t cs_min, std::uint64_t cs_max) {
  if (a.line_size != b.line_size)
    throw std::invalid_argument("divergence: line sizes differ");
  auto rows_a = sweep(a, cs_min, cs_max);
  auto rows_b = sweep(b, cs_min, cs_max);
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_a.size(); ++i)
    worst = std::max(worst, std::abs(rows_a[i].second - rows_b[i].second));
  return worst;
}

namespace {

// Shortest round-trip decimal form, so emitted CSVs are read back exactly.
std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

void write_sweep_csv(const std::vector<std::pair<std::uint64_t, double>>& rows,
                     std::ostream& out) {
  out << "cache_size,miss_ratio\n";
  for (const auto& [cs, ratio] : rows) out << cs << ',' << num(ratio) << '\n';
}

void write_outline_csv(const Outline& o, std::ostream& out) {
  out << "rank,distance\n";
  for (std::size_t i = 0; i < o.values.size(); ++i)
    out << i + 1 << ',' << num(o.values[i]) << '\n';
}

void write_outline_csv(const Outline& empirical, const Outline& model,
                       std::ostream& out) {
  if (empirical.values.size() != model.values.size())
    throw std::invalid_argument("outline csv: column lengths differ");
  out << "rank,distance,model_distance\n";
  for (std::size_t i = 0; i < empirical.values.size(); ++i)
    out << i + 1 << ',' << num(empirical.values[i]) << ','
        << num(model.values[i]) << '\n';
}

}  // namespace stackkit
