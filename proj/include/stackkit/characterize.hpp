#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stackkit/distributions.hpp"
#include "stackkit/stackdist.hpp"

namespace stackkit {

// Knobs for the characterization pipeline. threshold_lines() = ms / ls is
// the refinement floor: no target cache is smaller than min_cache_size, so
// fitting accuracy below it is deliberately traded away.
struct AnalysisConfig {
  std::uint64_t min_cache_size = 4096;  // bytes
  std::uint64_t line_size = 64;         // bytes, power of two
  std::uint32_t refinement_rounds = 3;
  double atom_threshold = 0.01;         // in (0,1)
  std::vector<Family> candidate_families;  // empty = all four
  std::uint64_t seed = 0;

  void validate() const;
  std::uint64_t threshold_lines() const;
  std::span<const Family> families() const;  // resolves the empty default
};

// The fitted description of one distance distribution: discrete atoms plus
// at most one continuous model, with the provenance needed to reuse it.
struct Characterization {
  DiscreteComponent discrete;
  std::optional<ContinuousModel> continuous;
  double continuous_weight = 0.0;
  std::uint64_t threshold_lines = 0;
  std::uint64_t line_size = 64;
  AccessKind kind = AccessKind::data;
  std::uint64_t sample_count = 0;
  std::uint64_t sampling_interval = 1;
  double cold_fraction = 0.0;
  std::uint32_t refinement_rounds = 0;
  double selected_by_error = 0.0;
  std::uint64_t seed = 0;
};

// One row per fit: the initial fit, then one per refinement round.
// eps_up/eps_down split the quantile MSE by sorted-sample position relative
// to the threshold; bias_skipped marks rounds where conditioning below the
// threshold was impossible and the samples passed through unchanged.
struct RefinementRecord {
  Family family = Family::uniform;
  double error = 0.0;
  double eps_up = 0.0;
  double eps_down = 0.0;
  bool bias_skipped = false;
};

struct RefinementDiagnostics {
  std::vector<RefinementRecord> rounds;
};

struct SplitResult {
  DiscreteComponent discrete;
  std::vector<double> residual;  // input order preserved
};

// Every distinct value holding at least atom_threshold of the samples
// becomes an atom; its occurrences leave the residual. Atom probabilities
// are renormalized within the component.
SplitResult split_discrete(const SampleSet& s, double atom_threshold);

struct FitSelection {
  ContinuousModel model;
  double error = 0.0;
};

// Moment-fits each candidate family and returns the smallest fit_error.
// Ties break by declaration order uniform < gamma < gpd < half_normal.
// Families whose moment equations reject the input are skipped; throws
// FitError when every candidate rejects (caller treats data as discrete).
FitSelection fit_best(std::span<const double> samples,
                      std::span<const Family> families);

// Replaces every sample below threshold_lines with a draw from the model
// conditioned below the threshold. Samples at or above the threshold pass
// through untouched; length and order are preserved. When the model has no
// mass below the threshold the input is returned unchanged and *skipped is
// set.
std::vector<double> bias(std::span<const double> samples,
                         const ContinuousModel& model,
                         std::uint64_t threshold_lines, Rng& rng,
                         bool* skipped = nullptr);

// Initial fit_best, then refinement_rounds iterations of bias followed by
// refit, re-selecting among the candidate families each round. Diagnostics
// carry one record per fit.
std::pair<FitSelection, RefinementDiagnostics> refined_fit(
    std::span<const double> samples, const AnalysisConfig& config);
std::pair<FitSelection, RefinementDiagnostics> refined_fit(
    std::span<const double> samples, const AnalysisConfig& config, Rng& rng);

// Full pipeline: split atoms, refine a fit on the residual, assemble the
// weighted mixture. Residuals too degenerate to fit are folded back into
// the discrete component. diagnostics, when non-null, receives the
// refinement records (empty when no continuous fit happened).
Characterization characterize(const SampleSet& s, double cold_fraction,
                              const AnalysisConfig& config,
                              RefinementDiagnostics* diagnostics = nullptr);

// Draw one distance from the mixture; continuous draws are clamped to >= 0.
double sample_mixture(const Characterization& c, Rng& rng);

// Canonical key-sorted JSON, one line. Parsing validates version, families,
// and parameter domains.
std::string to_canonical_json(const Characterization& c);
Characterization characterization_from_json(const std::string& text);

}  // namespace stackkit
