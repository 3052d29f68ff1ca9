#include "stackkit/stackdist.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "stackkit/kernels.hpp"

namespace stackkit {

namespace {

// Treap keyed by last-access time with subtree counts. One node per
// currently-known line; an access erases the line's old timestamp and
// inserts the new one, so count_greater(prev) is the number of distinct
// lines touched since the previous access.
class OrderTree {
 public:
  void insert(std::uint64_t key) { root_ = insert_at(root_, make_node(key)); }

  void erase(std::uint64_t key) { root_ = erase_at(root_, key); }

  // Number of stored keys strictly greater than key.
  std::uint64_t count_greater(std::uint64_t key) const {
    std::uint64_t total = 0;
    std::int32_t t = root_;
    while (t != kNil) {
      const Node& n = pool_[static_cast<std::size_t>(t)];
      if (key < n.key) {
        total += size_of(n.right) + 1;
        t = n.left;
      } else {
        t = n.right;
      }
    }
    return total;
  }

 private:
  static constexpr std::int32_t kNil = -1;

  struct Node {
    std::uint64_t key;
    std::uint32_t prio;
    std::uint32_t size;
    std::int32_t left;
    std::int32_t right;
  };

  std::uint32_t next_prio() {
    // splitmix64 keeps priorities deterministic across runs
    prio_state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = prio_state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return static_cast<std::uint32_t>(z >> 32);
  }

  std::uint32_t size_of(std::int32_t t) const {
    return t == kNil ? 0 : pool_[static_cast<std::size_t>(t)].size;
  }

  void pull(std::int32_t t) {
    Node& n = pool_[static_cast<std::size_t>(t)];
    n.size = size_of(n.left) + size_of(n.right) + 1;
  }

  std::int32_t make_node(std::uint64_t key) {
    std::int32_t idx;
    if (!free_.empty()) {
      idx = free_.back();
      free_.pop_back();
    } else {
      idx = static_cast<std::int32_t>(pool_.size());
      pool_.emplace_back();
    }
    pool_[static_cast<std::size_t>(idx)] = {key, next_prio(), 1, kNil, kNil};
    return idx;
  }

  // Splits t into keys < key and keys >= key.
  void split(std::int32_t t, std::uint64_t key, std::int32_t& lo,
             std::int32_t& hi) {
    if (t == kNil) {
      lo = hi = kNil;
      return;
    }
    Node& n = pool_[static_cast<std::size_t>(t)];
    if (n.key < key) {
      split(n.right, key, n.right, hi);
      lo = t;
    } else {
      split(n.left, key, lo, n.left);
      hi = t;
    }
    pull(t);
  }

  std::int32_t merge(std::int32_t a, std::int32_t b) {
    if (a == kNil) return b;
    if (b == kNil) return a;
    Node& na = pool_[static_cast<std::size_t>(a)];
    Node& nb = pool_[static_cast<std::size_t>(b)];
    if (na.prio >= nb.prio) {
      na.right = merge(na.right, b);
      pull(a);
      return a;
    }
    nb.left = merge(a, nb.left);
    pull(b);
    return b;
  }

  std::int32_t insert_at(std::int32_t t, std::int32_t node) {
    std::int32_t lo, hi;
    split(t, pool_[static_cast<std::size_t>(node)].key, lo, hi);
    return merge(merge(lo, node), hi);
  }

  std::int32_t erase_at(std::int32_t t, std::uint64_t key) {
    if (t == kNil) return kNil;
    Node& n = pool_[static_cast<std::size_t>(t)];
    if (n.key == key) {
      std::int32_t joined = merge(n.left, n.right);
      free_.push_back(t);
      return joined;
    }
    if (key < n.key)
      n.left = erase_at(n.left, key);
    else
      n.right = erase_at(n.right, key);
    pull(t);
    return t;
  }

  std::vector<Node> pool_;
  std::vector<std::int32_t> free_;
  std::int32_t root_ = kNil;
  std::uint64_t prio_state_ = 0x243f6a8885a308d3ull;
};

}  // namespace

std::vector<std::uint64_t> to_line_addresses(const AccessSequence& seq,
                                             std::uint64_t line_size) {
  if (line_size == 0 || (line_size & (line_size - 1)) != 0)
    throw std::invalid_argument("line_size must be a power of two");
  unsigned shift = 0;
  while ((line_size >> shift) != 1) ++shift;
  std::vector<std::uint64_t> lines(seq.addresses.size());
  kernels::shift_right(seq.addresses.data(), lines.data(),
                       seq.addresses.size(), shift);
  return lines;
}

DistanceSequence compute_distances(std::span<const std::uint64_t> lines) {
  DistanceSequence out;
  out.distances.resize(lines.size());
  OrderTree tree;
  std::unordered_map<std::uint64_t, std::uint64_t> last_time;
  last_time.reserve(lines.size() / 4 + 16);
  for (std::uint64_t t = 0; t < lines.size(); ++t) {
    auto [it, fresh] = last_time.try_emplace(lines[t], t);
    if (fresh) {
      out.distances[t] = kCold;
    } else {
      out.distances[t] = tree.count_greater(it->second);
      tree.erase(it->second);
      it->second = t;
    }
    tree.insert(t);
  }
  return out;
}

DistanceSequence compute_distances_bruteforce(
    std::span<const std::uint64_t> lines) {
  DistanceSequence out;
  out.distances.resize(lines.size());
  std::unordered_map<std::uint64_t, std::uint64_t> last_index;
  std::unordered_map<std::uint64_t, std::uint64_t> epoch_mark;
  std::uint64_t epoch = 0;
  for (std::uint64_t i = 0; i < lines.size(); ++i) {
    auto it = last_index.find(lines[i]);
    if (it == last_index.end()) {
      out.distances[i] = kCold;
    } else {
      ++epoch;
      std::uint64_t distinct = 0;
      for (std::uint64_t j = it->second + 1; j < i; ++j) {
        auto [mark, fresh] = epoch_mark.try_emplace(lines[j], epoch);
        if (fresh || mark->second != epoch) {
          mark->second = epoch;
          ++distinct;
        }
      }
      out.distances[i] = distinct;
    }
    last_index[lines[i]] = i;
  }
  return out;
}

SampleSet sample_distances(const DistanceSequence& d, std::uint64_t interval,
                           std::uint64_t offset, std::uint64_t line_size,
                           AccessKind kind, std::uint64_t window_begin,
                           std::uint64_t window_end) {
  if (interval == 0) throw std::invalid_argument("interval must be >= 1");
  if (offset >= interval) throw std::invalid_argument("offset must be < interval");
  std::uint64_t n = d.distances.size();
  if (window_end == 0 || window_end > n) window_end = n;
  if (window_begin > window_end) window_begin = window_end;
  SampleSet s;
  s.line_size = line_size;
  s.sampling_interval = interval;
  s.source_kind = kind;
  s.window_begin = window_begin;
  s.window_end = window_end;
  std::uint64_t first = window_begin;
  if (first % interval != offset)
    first += (offset + interval - first % interval) % interval;
  for (std::uint64_t i = first; i < window_end; i += interval)
    if (d.distances[i] != kCold)
      s.samples.push_back(static_cast<double>(d.distances[i]));
  return s;
}

Outline make_outline(const SampleSet& s) {
  Outline o;
  o.values = s.samples;
  std::sort(o.values.begin(), o.values.end(), std::greater<double>());
  return o;
}

std::pair<std::uint64_t, std::uint64_t> cold_stats(const DistanceSequence& d) {
  std::uint64_t cold = 0;
  for (auto v : d.distances) cold += v == kCold ? 1 : 0;
  return {cold, d.distances.size()};
}

void write_samples_csv(const SampleSet& s, std::ostream& out) {
  out << "# line_size=" << s.line_size << " interval=" << s.sampling_interval
      << " kind=" << (s.source_kind == AccessKind::instruction ? 'i' : 'd')
      << " window=" << s.window_begin << ':' << s.window_end << '\n';
  char buf[64];
  for (double v : s.samples) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, end - buf);
    out.put('\n');
  }
  if (!out) throw std::runtime_error("samples: write failed");
}

SampleSet read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("samples: empty input, header expected");
  SampleSet s;
  unsigned long long ls = 0, interval = 0, a = 0, b = 0;
  char kind_ch = 'd';
  if (std::sscanf(line.c_str(),
                  "# line_size=%llu interval=%llu kind=%c window=%llu:%llu",
                  &ls, &interval, &kind_ch, &a, &b) != 5)
    throw std::runtime_error("samples: malformed header: '" + line + "'");
  if (kind_ch != 'i' && kind_ch != 'd')
    throw std::runtime_error("samples: kind must be i or d");
  s.line_size = ls;
  s.sampling_interval = interval;
  s.source_kind = kind_ch == 'i' ? AccessKind::instruction : AccessKind::data;
  s.window_begin = a;
  s.window_end = b;
  std::uint64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    std::size_t end = line.find_last_not_of(" \t\r");
    double value = 0.0;
    auto first = line.data() + begin;
    auto last = line.data() + end + 1;
    auto [stop, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || stop != last || !(value >= 0.0))
      throw std::runtime_error("samples: bad distance at line " +
                               std::to_string(line_no));
    s.samples.push_back(value);
  }
  return s;
}

}  // namespace stackkit
