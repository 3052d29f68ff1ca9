#pragma once

#include <cstdint>
#include <stdexcept>

namespace stackkit {

struct CacheConfig {
  std::uint64_t cache_size = 0;  // bytes
  std::uint64_t line_size = 0;   // bytes

  // Both sizes powers of two, line divides cache, at least one line.
  void validate() const {
    auto pow2 = [](std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; };
    if (!pow2(cache_size)) throw std::invalid_argument("cache_size must be a power of two");
    if (!pow2(line_size)) throw std::invalid_argument("line_size must be a power of two");
    if (line_size > cache_size)
      throw std::invalid_argument("line_size must not exceed cache_size");
  }

  std::uint64_t capacity_lines() const { return cache_size / line_size; }
};

}  // namespace stackkit
