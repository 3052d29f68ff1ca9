#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace stackkit {

struct Characterization;

// Instruction and data streams are analyzed separately; a sequence carries
// one kind for its whole length.
enum class AccessKind : std::uint8_t { instruction = 0, data = 1 };

const char* access_kind_name(AccessKind k);

struct AccessSequence {
  AccessKind kind = AccessKind::data;
  std::vector<std::uint64_t> addresses;  // byte addresses

  bool operator==(const AccessSequence&) const = default;
};

enum class TraceFormat { binary, text };

// Binary layout: 8-byte magic "STKTRC01", 1 byte kind (0 = instruction,
// 1 = data), 7 zero bytes, little-endian u64 count, count little-endian u64
// addresses. Text: one address per line, decimal or 0x hex, '#' starts a
// comment, blank lines ignored.
AccessSequence read_trace(std::istream& in, TraceFormat format);
void write_trace(const AccessSequence& seq, std::ostream& out,
                 TraceFormat format);

// Reads a trace file, detecting binary by magic and falling back to text.
AccessSequence read_trace_file(const std::string& path);
void write_trace_file(const AccessSequence& seq, const std::string& path,
                      TraceFormat format);

// K line-aligned addresses visited round-robin. After warmup every access
// has stack distance exactly K - 1.
AccessSequence gen_cyclic(std::uint64_t num_lines, std::uint64_t num_accesses,
                          std::uint64_t line_size,
                          AccessKind kind = AccessKind::data);

// Each access uniform over K line-aligned addresses, deterministic per seed.
AccessSequence gen_random_uniform(std::uint64_t num_lines,
                                  std::uint64_t num_accesses,
                                  std::uint64_t line_size, std::uint64_t seed,
                                  AccessKind kind = AccessKind::data);

// Drives an explicit LRU stack with distances drawn from the model (rounded
// to the nearest integer depth, negatives clamped to 0). A draw at or beyond
// the current stack depth touches a fresh line, which records a cold access.
// Measured distances on the output reproduce the model up to rounding and
// cold-start truncation.
AccessSequence gen_from_distance_model(const Characterization& model,
                                       std::uint64_t num_accesses,
                                       std::uint64_t seed,
                                       AccessKind kind = AccessKind::data);

}  // namespace stackkit
