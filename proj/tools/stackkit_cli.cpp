// Command-line front-end: generate/ingest traces, compute and sample stack
// distances, fit characterizations, predict miss ratios, simulate LRU, and
// emit plot data. Data goes to stdout or --out; diagnostics go to stderr.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stackkit/cachesim.hpp"
#include "stackkit/characterize.hpp"
#include "stackkit/predict.hpp"
#include "stackkit/stackdist.hpp"
#include "stackkit/trace.hpp"

namespace {

using namespace stackkit;

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// Sizes accept K/M/G suffixes as powers of 1024.
std::uint64_t parse_size(const std::string& text) {
  if (text.empty()) throw CLI::ValidationError("size", "empty size");
  std::uint64_t multiplier = 1;
  std::string digits = text;
  switch (digits.back()) {
    case 'K': case 'k': multiplier = 1ull << 10; digits.pop_back(); break;
    case 'M': case 'm': multiplier = 1ull << 20; digits.pop_back(); break;
    case 'G': case 'g': multiplier = 1ull << 30; digits.pop_back(); break;
    default: break;
  }
  std::uint64_t value = 0;
  auto [stop, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || stop != digits.data() + digits.size())
    throw CLI::ValidationError("size", "cannot parse size '" + text + "'");
  if (value != 0 && value > UINT64_MAX / multiplier)
    throw CLI::ValidationError("size", "size overflows 64 bits");
  return value * multiplier;
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("range", "expected <min>:<max>");
  return {parse_size(text.substr(0, colon)), parse_size(text.substr(colon + 1))};
}

AccessKind parse_kind(const std::string& text) {
  if (text == "instruction" || text == "i") return AccessKind::instruction;
  if (text == "data" || text == "d") return AccessKind::data;
  throw CLI::ValidationError("kind", "must be instruction or data");
}

std::vector<Family> parse_families(const std::string& text) {
  if (text == "auto") return {};
  std::vector<Family> families;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ','))
    families.push_back(family_from_name(token));
  if (families.empty())
    throw CLI::ValidationError("families", "empty family list");
  return families;
}

// Output sink: stdout when no path given; existing files need --force.
class Output {
 public:
  Output(const std::string& path, bool force, bool binary = false) {
    if (path.empty()) return;
    if (!force && std::filesystem::exists(path))
      throw std::runtime_error(path + " exists; pass --force to overwrite");
    auto mode = binary ? std::ios::binary | std::ios::out : std::ios::out;
    file_.open(path, mode);
    if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
  }

  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

Characterization load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return characterization_from_json(buf.str());
}

SampleSet load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open samples " + path);
  return read_samples_csv(in);
}

int run(int argc, char** argv) {
  CLI::App app{"stack-distance toolkit: trace analysis, distribution "
               "fitting, and cache miss-ratio prediction"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "synthesize a trace file");
  std::string gen_pattern, gen_model_path, gen_out, gen_kind = "data";
  std::uint64_t gen_lines = 1024, gen_accesses = 1 << 20, gen_seed = 0;
  std::string gen_line_size = "64";
  bool gen_force = false;
  gen->add_option("--pattern", gen_pattern, "cyclic | uniform | from-model")
      ->required();
  gen->add_option("--lines", gen_lines, "distinct lines (cyclic/uniform)");
  gen->add_option("--accesses", gen_accesses, "number of accesses");
  gen->add_option("--line-size", gen_line_size, "line size in bytes");
  gen->add_option("--model", gen_model_path, "characterization JSON (from-model)");
  gen->add_option("--kind", gen_kind, "instruction | data");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output trace file (binary)")->required();
  gen->add_flag("--force", gen_force, "overwrite existing output");
  gen->callback([&] {
    AccessKind kind = parse_kind(gen_kind);
    std::uint64_t ls = parse_size(gen_line_size);
    AccessSequence seq;
    if (gen_pattern == "cyclic") {
      seq = gen_cyclic(gen_lines, gen_accesses, ls, kind);
    } else if (gen_pattern == "uniform") {
      seq = gen_random_uniform(gen_lines, gen_accesses, ls, gen_seed, kind);
    } else if (gen_pattern == "from-model") {
      if (gen_model_path.empty())
        throw std::runtime_error("--pattern from-model requires --model");
      seq = gen_from_distance_model(load_model(gen_model_path), gen_accesses,
                                    gen_seed, kind);
    } else {
      throw std::runtime_error("unknown pattern '" + gen_pattern + "'");
    }
    Output out(gen_out, gen_force, true);
    write_trace(seq, out.stream(), TraceFormat::binary);
    std::cerr << "wrote " << seq.addresses.size() << " accesses to " << gen_out
              << "\n";
  });

  // distances
  auto* dist = app.add_subcommand("distances",
                                  "compute stack distances and sample them");
  std::string dist_trace, dist_out, dist_window;
  std::string dist_line_size = "64";
  std::uint64_t dist_interval = 1, dist_offset = 0;
  bool dist_force = false;
  dist->add_option("trace", dist_trace, "input trace file")->required();
  dist->add_option("--line-size", dist_line_size, "line size in bytes");
  dist->add_option("--interval", dist_interval, "keep every Nth access");
  dist->add_option("--offset", dist_offset, "sampling phase");
  dist->add_option("--window", dist_window, "restrict to ordinals <a>:<b>");
  dist->add_option("--out", dist_out, "output samples CSV (default stdout)");
  dist->add_flag("--force", dist_force, "overwrite existing output");
  dist->callback([&] {
    auto seq = read_trace_file(dist_trace);
    std::uint64_t ls = parse_size(dist_line_size);
    auto lines = to_line_addresses(seq, ls);
    auto d = compute_distances(lines);
    std::uint64_t wb = 0, we = 0;
    if (!dist_window.empty()) std::tie(wb, we) = parse_range(dist_window);
    auto samples =
        sample_distances(d, dist_interval, dist_offset, ls, seq.kind, wb, we);
    auto [cold, total] = cold_stats(d);
    Output out(dist_out, dist_force);
    write_samples_csv(samples, out.stream());
    std::cerr << "cold=" << cold << " total=" << total
              << " cold_fraction=" << format_double(
                     total ? static_cast<double>(cold) / static_cast<double>(total) : 0.0)
              << " samples=" << samples.samples.size() << "\n";
  });

  // fit
  auto* fit = app.add_subcommand("fit", "fit a characterization to samples");
  std::string fit_samples, fit_out, fit_families = "auto";
  std::string fit_min_cache = "4096", fit_line_size;
  std::uint32_t fit_refinements = 3;
  double fit_atom_threshold = 0.01, fit_cold_fraction = 0.0;
  std::uint64_t fit_seed = 0;
  bool fit_force = false;
  fit->add_option("samples", fit_samples, "input samples CSV")->required();
  fit->add_option("--min-cache", fit_min_cache, "smallest target cache size");
  fit->add_option("--line-size", fit_line_size,
                  "line size; must match the CSV header when given");
  fit->add_option("--refinements", fit_refinements, "bias/refit rounds");
  fit->add_option("--families", fit_families,
                  "auto or comma list of uniform,gamma,gpd,half_normal");
  fit->add_option("--atom-threshold", fit_atom_threshold,
                  "discrete-atom frequency threshold");
  fit->add_option("--cold-fraction", fit_cold_fraction,
                  "compulsory-miss fraction to record");
  fit->add_option("--seed", fit_seed, "refinement resampling seed");
  fit->add_option("--out", fit_out, "output JSON (default stdout)");
  fit->add_flag("--force", fit_force, "overwrite existing output");
  fit->callback([&] {
    auto samples = load_samples(fit_samples);
    if (!fit_line_size.empty() && parse_size(fit_line_size) != samples.line_size)
      throw std::runtime_error("--line-size disagrees with the samples CSV header");
    AnalysisConfig config;
    config.min_cache_size = parse_size(fit_min_cache);
    config.line_size = samples.line_size;
    config.refinement_rounds = fit_refinements;
    config.atom_threshold = fit_atom_threshold;
    config.candidate_families = parse_families(fit_families);
    config.seed = fit_seed;
    RefinementDiagnostics diag;
    auto c = characterize(samples, fit_cold_fraction, config, &diag);
    Output out(fit_out, fit_force);
    out.stream() << to_canonical_json(c) << "\n";
    std::cerr << "samples=" << c.sample_count
              << " discrete_weight=" << format_double(c.discrete.total_weight)
              << " continuous="
              << (c.continuous ? family_name(c.continuous->family) : "none")
              << " fit_error=" << format_double(c.selected_by_error) << "\n";
    for (std::size_t r = 0; r < diag.rounds.size(); ++r) {
      const auto& row = diag.rounds[r];
      std::cerr << "round=" << r << " family=" << family_name(row.family)
                << " fit_error=" << format_double(row.error)
                << " eps_up=" << format_double(row.eps_up)
                << " eps_down=" << format_double(row.eps_down);
      if (row.bias_skipped) std::cerr << " bias_skipped";
      std::cerr << "\n";
    }
  });

  // predict
  auto* pred = app.add_subcommand("predict", "miss ratio from a model");
  std::string pred_model, pred_cache_size, pred_sweep, pred_out;
  bool pred_force = false;
  pred->add_option("model", pred_model, "characterization JSON")->required();
  pred->add_option("--cache-size", pred_cache_size, "single cache size");
  pred->add_option("--sweep", pred_sweep, "cache-size range <min>:<max>");
  pred->add_option("--out", pred_out, "output CSV for sweeps");
  pred->add_flag("--force", pred_force, "overwrite existing output");
  pred->callback([&] {
    auto c = load_model(pred_model);
    if (pred_cache_size.empty() == pred_sweep.empty())
      throw std::runtime_error("pass exactly one of --cache-size or --sweep");
    if (!pred_cache_size.empty()) {
      CacheConfig cache{parse_size(pred_cache_size), c.line_size};
      auto r = miss_ratio(c, cache);
      if (r.below_threshold)
        std::cerr << "warning: capacity " << r.capacity_lines
                  << " lines is below the characterization threshold ("
                  << c.threshold_lines << " lines)\n";
      Output out(pred_out, pred_force);
      out.stream() << format_double(r.capacity_miss_ratio) << "\n";
      return;
    }
    auto [lo, hi] = parse_range(pred_sweep);
    auto rows = sweep(c, lo, hi);
    Output out(pred_out, pred_force);
    write_sweep_csv(rows, out.stream());
  });

  // simulate
  auto* sim = app.add_subcommand("simulate", "LRU cache oracle");
  std::string sim_trace, sim_cache_size, sim_line_size = "64";
  sim->add_option("trace", sim_trace, "input trace file")->required();
  sim->add_option("--cache-size", sim_cache_size, "cache size in bytes")
      ->required();
  sim->add_option("--line-size", sim_line_size, "line size in bytes");
  sim->callback([&] {
    auto seq = read_trace_file(sim_trace);
    CacheConfig cache{parse_size(sim_cache_size), parse_size(sim_line_size)};
    auto r = simulate_lru(seq, cache);
    double capacity_ratio =
        r.accesses > r.compulsory_misses
            ? static_cast<double>(r.capacity_misses) /
                  static_cast<double>(r.accesses - r.compulsory_misses)
            : 0.0;
    std::cout << "accesses=" << r.accesses << " hits=" << r.hits
              << " compulsory_misses=" << r.compulsory_misses
              << " capacity_misses=" << r.capacity_misses
              << " capacity_miss_ratio=" << format_double(capacity_ratio)
              << "\n";
  });

  // outline
  auto* outl = app.add_subcommand("outline", "descending-order sample plot data");
  std::string outl_samples, outl_model, outl_out;
  std::uint64_t outl_seed = 0;
  bool outl_force = false;
  outl->add_option("samples", outl_samples, "input samples CSV")->required();
  outl->add_option("--model", outl_model,
                   "characterization JSON for a Monte Carlo column");
  outl->add_option("--seed", outl_seed, "Monte Carlo seed");
  outl->add_option("--out", outl_out, "output CSV (default stdout)");
  outl->add_flag("--force", outl_force, "overwrite existing output");
  outl->callback([&] {
    auto samples = load_samples(outl_samples);
    auto empirical = make_outline(samples);
    Output out(outl_out, outl_force);
    if (outl_model.empty()) {
      write_outline_csv(empirical, out.stream());
      return;
    }
    auto c = load_model(outl_model);
    auto mc = monte_carlo_outline(c, empirical.values.size(), outl_seed);
    write_outline_csv(empirical, mc, out.stream());
  });

  // compare
  auto* cmp = app.add_subcommand("compare", "divergence between two models");
  std::string cmp_a, cmp_b, cmp_sweep, cmp_out;
  bool cmp_force = false;
  cmp->add_option("model_a", cmp_a, "first characterization JSON")->required();
  cmp->add_option("model_b", cmp_b, "second characterization JSON")->required();
  cmp->add_option("--sweep", cmp_sweep, "cache-size range <min>:<max>")
      ->required();
  cmp->add_option("--out", cmp_out, "per-size CSV output");
  cmp->add_flag("--force", cmp_force, "overwrite existing output");
  cmp->callback([&] {
    auto a = load_model(cmp_a);
    auto b = load_model(cmp_b);
    auto [lo, hi] = parse_range(cmp_sweep);
    double worst = divergence(a, b, lo, hi);
    if (!cmp_out.empty()) {
      auto rows_a = sweep(a, lo, hi);
      auto rows_b = sweep(b, lo, hi);
      Output out(cmp_out, cmp_force);
      out.stream() << "cache_size,miss_ratio_a,miss_ratio_b,abs_diff\n";
      for (std::size_t i = 0; i < rows_a.size(); ++i)
        out.stream() << rows_a[i].first << ','
                     << format_double(rows_a[i].second) << ','
                     << format_double(rows_b[i].second) << ','
                     << format_double(
                            std::abs(rows_a[i].second - rows_b[i].second))
                     << '\n';
    }
    std::cout << format_double(worst) << "\n";
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
