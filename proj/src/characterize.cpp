#include "stackkit/characterize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "stackkit/kernels.hpp"

namespace stackkit {

namespace {

constexpr Family kAllFamilies[] = {Family::uniform, Family::gamma, Family::gpd,
                                   Family::half_normal};

bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Quantile MSE split by sorted-sample position relative to the threshold,
// each side normalized by its own count.
std::pair<double, double> eps_split(const ContinuousModel& m,
                                    std::span<const double> sorted,
                                    double threshold) {
  auto grid = quantile_grid(m, sorted.size());
  double up_sum = 0.0, down_sum = 0.0;
  std::size_t up_n = 0, down_n = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    double d = sorted[i] - grid[i];
    if (sorted[i] >= threshold) {
      up_sum += d * d;
      ++up_n;
    } else {
      down_sum += d * d;
      ++down_n;
    }
  }
  return {up_n ? up_sum / static_cast<double>(up_n) : 0.0,
          down_n ? down_sum / static_cast<double>(down_n) : 0.0};
}

RefinementRecord make_record(const FitSelection& sel,
                             std::span<const double> samples, double threshold,
                             bool bias_skipped) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  auto [up, down] = eps_split(sel.model, sorted, threshold);
  return {sel.model.family, sel.error, up, down, bias_skipped};
}

}  // namespace

void AnalysisConfig::validate() const {
  if (!is_pow2(line_size))
    throw std::invalid_argument("config: line_size must be a power of two");
  if (min_cache_size < line_size)
    throw std::invalid_argument("config: min_cache_size must be >= line_size");
  if (min_cache_size % line_size != 0)
    throw std::invalid_argument(
        "config: min_cache_size must be a multiple of line_size");
  if (!(atom_threshold > 0.0) || !(atom_threshold < 1.0))
    throw std::invalid_argument("config: atom_threshold must be in (0,1)");
}

std::uint64_t AnalysisConfig::threshold_lines() const {
  return min_cache_size / line_size;
}

std::span<const Family> AnalysisConfig::families() const {
  if (candidate_families.empty()) return kAllFamilies;
  return candidate_families;
}

SplitResult split_discrete(const SampleSet& s, double atom_threshold) {
  if (s.samples.empty())
    throw std::invalid_argument("split_discrete: empty sample set");
  if (!(atom_threshold > 0.0) || !(atom_threshold < 1.0))
    throw std::invalid_argument("split_discrete: threshold must be in (0,1)");
  const auto n = s.samples.size();
  std::map<double, std::uint64_t> freq;
  for (double v : s.samples) ++freq[v];

  // Atom values are integer distances; a non-integral repeated value can
  // only come from synthetic continuous input and stays in the residual.
  std::map<double, std::uint64_t> atoms;
  for (auto& [value, count] : freq) {
    bool integral = std::nearbyint(value) == value && value >= 0.0;
    if (integral &&
        static_cast<double>(count) / static_cast<double>(n) + 1e-12 >=
            atom_threshold)
      atoms.emplace(value, count);
  }

  SplitResult out;
  std::uint64_t atom_total = 0;
  for (auto& [value, count] : atoms) atom_total += count;
  out.discrete.source_total = n;
  out.discrete.total_weight =
      static_cast<double>(atom_total) / static_cast<double>(n);
  for (auto& [value, count] : atoms) {
    out.discrete.atoms.push_back(
        {static_cast<std::uint64_t>(value),
         static_cast<double>(count) / static_cast<double>(atom_total)});
    out.discrete.counts.push_back(count);
  }
  out.residual.reserve(n - atom_total);
  for (double v : s.samples)
    if (!atoms.contains(v)) out.residual.push_back(v);
  return out;
}

FitSelection fit_best(std::span<const double> samples,
                      std::span<const Family> families) {
  if (samples.size() < 2)
    throw FitError("fit_best: need at least 2 samples");
  Moments m = moments(samples);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  bool found = false;
  FitSelection best;
  for (Family f : kAllFamilies) {
    if (std::find(families.begin(), families.end(), f) == families.end())
      continue;
    ContinuousModel model;
    try {
      model = mom_fit(f, m);
    } catch (const FitError&) {
      continue;
    }
    double err = fit_error_sorted(model, sorted);
    // Relative margin: some moment fits induce the same distribution (a
    // shape of -1 turns the tail family into the uniform one), so exact
    // comparison would let rounding noise pick the winner. Ties keep the
    // earlier family.
    if (!found || err < best.error * (1.0 - 1e-9)) {
      best = {model, err};
      found = true;
    }
  }
  if (!found)
    throw FitError("fit_best: every candidate family rejected the moments");
  return best;
}

std::vector<double> bias(std::span<const double> samples,
                         const ContinuousModel& model,
                         std::uint64_t threshold_lines, Rng& rng,
                         bool* skipped) {
  if (skipped) *skipped = false;
  std::vector<double> out(samples.begin(), samples.end());
  const double t = static_cast<double>(threshold_lines);
  bool any_low = std::any_of(out.begin(), out.end(),
                             [t](double v) { return v < t; });
  if (!any_low) return out;
  if (!(cdf(model, t) > 0.0)) {
    if (skipped) *skipped = true;
    return out;
  }
  for (double& v : out)
    if (v < t) v = sample_below(model, t, rng);
  return out;
}

std::pair<FitSelection, RefinementDiagnostics> refined_fit(
    std::span<const double> samples, const AnalysisConfig& config, Rng& rng) {
  config.validate();
  const std::uint64_t t_lines = config.threshold_lines();
  const double t = static_cast<double>(t_lines);
  const auto families = config.families();

  std::vector<double> current(samples.begin(), samples.end());
  FitSelection sel = fit_best(current, families);
  RefinementDiagnostics diag;
  diag.rounds.push_back(make_record(sel, current, t, false));

  for (std::uint32_t round = 0; round < config.refinement_rounds; ++round) {
    bool skipped = false;
    current = bias(current, sel.model, t_lines, rng, &skipped);
    sel = fit_best(current, families);
    diag.rounds.push_back(make_record(sel, current, t, skipped));
  }
  return {sel, diag};
}

std::pair<FitSelection, RefinementDiagnostics> refined_fit(
    std::span<const double> samples, const AnalysisConfig& config) {
  Rng rng(config.seed);
  return refined_fit(samples, config, rng);
}

namespace {

// All residual occurrences become atoms: used when no continuous family can
// represent the residual (degenerate moments or too few samples).
void fold_residual_into_discrete(DiscreteComponent& d,
                                 std::span<const double> residual) {
  std::map<std::uint64_t, std::uint64_t> merged;
  for (std::size_t i = 0; i < d.atoms.size(); ++i)
    merged[d.atoms[i].value] += d.counts[i];
  for (double v : residual)
    merged[static_cast<std::uint64_t>(std::llround(std::max(0.0, v)))] += 1;
  std::uint64_t total = 0;
  for (auto& [value, count] : merged) total += count;
  d.atoms.clear();
  d.counts.clear();
  for (auto& [value, count] : merged) {
    d.atoms.push_back(
        {value, static_cast<double>(count) / static_cast<double>(total)});
    d.counts.push_back(count);
  }
  d.total_weight = 1.0;
}

}  // namespace

Characterization characterize(const SampleSet& s, double cold_fraction,
                              const AnalysisConfig& config,
                              RefinementDiagnostics* diagnostics) {
  config.validate();
  if (diagnostics) diagnostics->rounds.clear();
  if (s.samples.empty())
    throw std::invalid_argument("characterize: empty sample set");
  if (!(cold_fraction >= 0.0) || !(cold_fraction <= 1.0))
    throw std::invalid_argument("characterize: cold_fraction must be in [0,1]");
  if (s.line_size != config.line_size)
    throw std::invalid_argument(
        "characterize: sample set line_size differs from config line_size");

  Characterization c;
  c.threshold_lines = config.threshold_lines();
  c.line_size = s.line_size;
  c.kind = s.source_kind;
  c.sample_count = s.samples.size();
  c.sampling_interval = s.sampling_interval;
  c.cold_fraction = cold_fraction;
  c.refinement_rounds = config.refinement_rounds;
  c.seed = config.seed;

  SplitResult split = split_discrete(s, config.atom_threshold);
  c.discrete = std::move(split.discrete);

  if (!split.residual.empty()) {
    try {
      Rng rng(config.seed);
      auto [sel, diag] = refined_fit(split.residual, config, rng);
      c.continuous = sel.model;
      c.continuous_weight = static_cast<double>(split.residual.size()) /
                            static_cast<double>(s.samples.size());
      c.selected_by_error = sel.error;
      if (diagnostics) *diagnostics = std::move(diag);
    } catch (const FitError&) {
      fold_residual_into_discrete(c.discrete, split.residual);
      c.continuous.reset();
      c.continuous_weight = 0.0;
    }
  }
  return c;
}

double sample_mixture(const Characterization& c, Rng& rng) {
  double u = rng.uniform();
  if (u < c.discrete.total_weight || !c.continuous) {
    const auto& atoms = c.discrete.atoms;
    if (atoms.empty())
      throw std::logic_error("sample_mixture: empty characterization");
    double v = u / c.discrete.total_weight;
    double cum = 0.0;
    for (const auto& atom : atoms) {
      cum += atom.probability;
      if (v < cum) return static_cast<double>(atom.value);
    }
    return static_cast<double>(atoms.back().value);
  }
  double s = sample(*c.continuous, rng);
  return s < 0.0 ? 0.0 : s;
}

namespace {

nlohmann::json params_json(const ContinuousModel& m) {
  switch (m.family) {
    case Family::uniform: return {{"a", m.a}, {"b", m.b}};
    case Family::gamma: return {{"shape", m.shape}, {"scale", m.scale}};
    case Family::gpd: return {{"shape", m.shape}, {"scale", m.scale}};
    case Family::half_normal: return {{"scale", m.scale}};
  }
  throw std::logic_error("unknown family");
}

ContinuousModel model_from_json(const nlohmann::json& j) {
  Family f = family_from_name(j.at("family").get<std::string>());
  const auto& p = j.at("params");
  switch (f) {
    case Family::uniform:
      return ContinuousModel::make_uniform(p.at("a").get<double>(),
                                           p.at("b").get<double>());
    case Family::gamma:
      return ContinuousModel::make_gamma(p.at("shape").get<double>(),
                                         p.at("scale").get<double>());
    case Family::gpd:
      return ContinuousModel::make_gpd(p.at("shape").get<double>(),
                                       p.at("scale").get<double>());
    case Family::half_normal:
      return ContinuousModel::make_half_normal(p.at("scale").get<double>());
  }
  throw std::logic_error("unknown family");
}

}  // namespace

std::string to_canonical_json(const Characterization& c) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& atom : c.discrete.atoms)
    atoms.push_back({atom.value, atom.probability});
  nlohmann::json j{
      {"version", 1},
      {"kind", access_kind_name(c.kind)},
      {"line_size", c.line_size},
      {"threshold_lines", c.threshold_lines},
      {"sample_count", c.sample_count},
      {"sampling_interval", c.sampling_interval},
      {"cold_fraction", c.cold_fraction},
      {"discrete",
       {{"weight", c.discrete.total_weight}, {"atoms", std::move(atoms)}}},
      {"refinement_rounds", c.refinement_rounds},
      {"fit_error", c.selected_by_error},
      {"seed", c.seed},
  };
  if (c.continuous) {
    j["continuous"] = {{"family", family_name(c.continuous->family)},
                       {"params", params_json(*c.continuous)},
                       {"weight", c.continuous_weight}};
  } else {
    j["continuous"] = nullptr;
  }
  return j.dump();
}

Characterization characterization_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("characterization: bad json: ") +
                             e.what());
  }
  try {
    if (j.at("version").get<int>() != 1)
      throw std::runtime_error("characterization: unsupported version");
    Characterization c;
    std::string kind = j.at("kind").get<std::string>();
    if (kind != "instruction" && kind != "data")
      throw std::runtime_error("characterization: bad kind");
    c.kind = kind == "instruction" ? AccessKind::instruction : AccessKind::data;
    c.line_size = j.at("line_size").get<std::uint64_t>();
    if (!is_pow2(c.line_size))
      throw std::runtime_error("characterization: line_size not a power of two");
    c.threshold_lines = j.at("threshold_lines").get<std::uint64_t>();
    c.sample_count = j.at("sample_count").get<std::uint64_t>();
    c.sampling_interval = j.at("sampling_interval").get<std::uint64_t>();
    c.cold_fraction = j.at("cold_fraction").get<double>();
    if (!(c.cold_fraction >= 0.0 && c.cold_fraction <= 1.0))
      throw std::runtime_error("characterization: cold_fraction out of range");
    c.refinement_rounds = j.at("refinement_rounds").get<std::uint32_t>();
    c.selected_by_error = j.at("fit_error").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();

    const auto& disc = j.at("discrete");
    c.discrete.total_weight = disc.at("weight").get<double>();
    double prob_sum = 0.0;
    std::uint64_t prev_value = 0;
    bool first = true;
    for (const auto& entry : disc.at("atoms")) {
      if (!entry.is_array() || entry.size() != 2)
        throw std::runtime_error("characterization: atom must be [value, prob]");
      DiscreteAtom atom{entry[0].get<std::uint64_t>(),
                        entry[1].get<double>()};
      if (!(atom.probability > 0.0 && atom.probability <= 1.0))
        throw std::runtime_error("characterization: atom probability out of range");
      if (!first && atom.value <= prev_value)
        throw std::runtime_error(
            "characterization: atom values must strictly increase");
      prev_value = atom.value;
      first = false;
      prob_sum += atom.probability;
      c.discrete.atoms.push_back(atom);
    }
    if (!c.discrete.atoms.empty() && std::abs(prob_sum - 1.0) > 1e-9)
      throw std::runtime_error("characterization: atom probabilities must sum to 1");

    const auto& cont = j.at("continuous");
    if (!cont.is_null()) {
      c.continuous = model_from_json(cont);
      c.continuous_weight = cont.at("weight").get<double>();
    }
    double weight_sum = c.discrete.total_weight + c.continuous_weight;
    if (std::abs(weight_sum - 1.0) > 1e-9)
      throw std::runtime_error(
          "characterization: discrete and continuous weights must sum to 1");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("characterization: bad json: ") +
                             e.what());
  }
}

}  // namespace stackkit
