#include "stackkit/trace.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "stackkit/characterize.hpp"
#include "stackkit/rng.hpp"

namespace stackkit {

namespace {

constexpr char kMagic[8] = {'S', 'T', 'K', 'T', 'R', 'C', '0', '1'};
constexpr std::size_t kHeaderSize = 24;

void put_u64_le(std::uint64_t v, char* out) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint64_t get_u64_le(const char* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  return v;
}

AccessSequence read_binary(std::istream& in) {
  char header[kHeaderSize];
  in.read(header, kHeaderSize);
  if (in.gcount() != kHeaderSize)
    throw std::runtime_error("trace: truncated header (byte " +
                             std::to_string(in.gcount()) + ")");
  if (std::memcmp(header, kMagic, 8) != 0)
    throw std::runtime_error("trace: bad magic at byte 0");
  unsigned kind_byte = static_cast<unsigned char>(header[8]);
  if (kind_byte > 1)
    throw std::runtime_error("trace: bad kind byte at byte 8");
  AccessSequence seq;
  seq.kind = kind_byte == 0 ? AccessKind::instruction : AccessKind::data;
  std::uint64_t count = get_u64_le(header + 16);
  seq.addresses.resize(count);
  std::vector<char> buf(8 * 4096);
  std::uint64_t done = 0;
  while (done < count) {
    std::uint64_t chunk = std::min<std::uint64_t>(4096, count - done);
    in.read(buf.data(), static_cast<std::streamsize>(8 * chunk));
    if (in.gcount() != static_cast<std::streamsize>(8 * chunk))
      throw std::runtime_error(
          "trace: truncated record at byte " +
          std::to_string(kHeaderSize + 8 * done + static_cast<std::uint64_t>(in.gcount())));
    for (std::uint64_t i = 0; i < chunk; ++i)
      seq.addresses[done + i] = get_u64_le(buf.data() + 8 * i);
    done += chunk;
  }
  return seq;
}

AccessSequence read_text(std::istream& in) {
  AccessSequence seq;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    std::size_t end = line.find_last_not_of(" \t\r");
    std::string token = line.substr(begin, end - begin + 1);
    int base = 10;
    if (token.size() > 2 && token[0] == '0' && (token[1] == 'x' || token[1] == 'X'))
      base = 16;
    errno = 0;
    char* stop = nullptr;
    std::uint64_t value = std::strtoull(token.c_str(), &stop, base);
    if (errno != 0 || stop == token.c_str() || *stop != '\0')
      throw std::runtime_error("trace: unparseable address at line " +
                               std::to_string(line_no) + ": '" + token + "'");
    seq.addresses.push_back(value);
  }
  return seq;
}

}  // namespace

const char* access_kind_name(AccessKind k) {
  return k == AccessKind::instruction ? "instruction" : "data";
}

AccessSequence read_trace(std::istream& in, TraceFormat format) {
  return format == TraceFormat::binary ? read_binary(in) : read_text(in);
}

void write_trace(const AccessSequence& seq, std::ostream& out,
                 TraceFormat format) {
  if (format == TraceFormat::text) {
    for (auto a : seq.addresses) out << a << '\n';
    if (!out) throw std::runtime_error("trace: write failed");
    return;
  }
  char header[kHeaderSize] = {};
  std::memcpy(header, kMagic, 8);
  header[8] = seq.kind == AccessKind::instruction ? 0 : 1;
  put_u64_le(seq.addresses.size(), header + 16);
  out.write(header, kHeaderSize);
  std::vector<char> buf(8 * 4096);
  std::size_t done = 0;
  while (done < seq.addresses.size()) {
    std::size_t chunk = std::min<std::size_t>(4096, seq.addresses.size() - done);
    for (std::size_t i = 0; i < chunk; ++i)
      put_u64_le(seq.addresses[done + i], buf.data() + 8 * i);
    out.write(buf.data(), static_cast<std::streamsize>(8 * chunk));
    done += chunk;
  }
  if (!out) throw std::runtime_error("trace: write failed");
}

AccessSequence read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("trace: cannot open " + path);
  char probe[8] = {};
  in.read(probe, 8);
  bool binary = in.gcount() == 8 && std::memcmp(probe, kMagic, 8) == 0;
  in.clear();
  in.seekg(0);
  return read_trace(in, binary ? TraceFormat::binary : TraceFormat::text);
}

void write_trace_file(const AccessSequence& seq, const std::string& path,
                      TraceFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("trace: cannot open " + path + " for writing");
  write_trace(seq, out, format);
}

AccessSequence gen_cyclic(std::uint64_t num_lines, std::uint64_t num_accesses,
                          std::uint64_t line_size, AccessKind kind) {
  if (num_lines == 0) throw std::invalid_argument("gen_cyclic: num_lines must be >= 1");
  AccessSequence seq;
  seq.kind = kind;
  seq.addresses.resize(num_accesses);
  for (std::uint64_t i = 0; i < num_accesses; ++i)
    seq.addresses[i] = (i % num_lines) * line_size;
  return seq;
}

AccessSequence gen_random_uniform(std::uint64_t num_lines,
                                  std::uint64_t num_accesses,
                                  std::uint64_t line_size, std::uint64_t seed,
                                  AccessKind kind) {
  if (num_lines == 0)
    throw std::invalid_argument("gen_random_uniform: num_lines must be >= 1");
  AccessSequence seq;
  seq.kind = kind;
  seq.addresses.resize(num_accesses);
  Rng rng(seed);
  for (std::uint64_t i = 0; i < num_accesses; ++i)
    seq.addresses[i] = rng.below(num_lines) * line_size;
  return seq;
}

AccessSequence gen_from_distance_model(const Characterization& model,
                                       std::uint64_t num_accesses,
                                       std::uint64_t seed, AccessKind kind) {
  AccessSequence seq;
  seq.kind = kind;
  seq.addresses.resize(num_accesses);
  Rng rng(seed);
  std::vector<std::uint64_t> stack;  // most recently used first
  std::uint64_t next_line = 0;
  for (std::uint64_t i = 0; i < num_accesses; ++i) {
    double draw = sample_mixture(model, rng);
    std::uint64_t depth =
        draw <= 0.0 ? 0 : static_cast<std::uint64_t>(std::llround(draw));
    std::uint64_t line;
    if (depth < stack.size()) {
      line = stack[depth];
      stack.erase(stack.begin() + static_cast<std::ptrdiff_t>(depth));
    } else {
      line = next_line++;
    }
    stack.insert(stack.begin(), line);
    seq.addresses[i] = line * model.line_size;
  }
  return seq;
}

}  // namespace stackkit
