#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stackkit/rng.hpp"

namespace stackkit {

// Continuous families available to the moment-matching fitter.
enum class Family { uniform, gamma, gpd, half_normal };

const char* family_name(Family f);
Family family_from_name(const std::string& name);

// One fitted continuous distribution. The family decides which fields carry
// the parameters:
//   uniform:     [a, b]
//   gamma:       shape k, scale theta
//   gpd:         shape xi, scale sigma (location fixed at 0)
//   half_normal: scale sigma
struct ContinuousModel {
  Family family = Family::uniform;
  double a = 0.0;
  double b = 0.0;
  double shape = 0.0;
  double scale = 0.0;
  // Set when a fitted gpd shape reaches 0.5: the mean stays finite but the
  // variance does not, so moment-derived summaries of the model are suspect.
  bool heavy_tail = false;

  static ContinuousModel make_uniform(double a, double b);
  static ContinuousModel make_gamma(double shape, double scale);
  static ContinuousModel make_gpd(double shape, double scale);
  static ContinuousModel make_half_normal(double scale);
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // population form, divides by n
  std::uint64_t count = 0;
};

struct DiscreteAtom {
  std::uint64_t value = 0;
  double probability = 0.0;  // conditional on landing in the discrete part
};

// Atoms extracted from a sample set, values strictly increasing. When the
// component came from counting samples directly, counts/source_total keep
// the integer tallies so downstream mass queries can stay exact; they are
// bookkeeping only and do not survive serialization.
struct DiscreteComponent {
  std::vector<DiscreteAtom> atoms;
  double total_weight = 0.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t source_total = 0;
};

// Raised when a family's moment equations have no valid solution for the
// given sample moments (for example a nonpositive mean for gamma).
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Moments moments(std::span<const double> xs);

// Method-of-moments parameter recovery for one family. Throws FitError when
// the moments are outside the family's domain.
ContinuousModel mom_fit(Family f, const Moments& m);

double cdf(const ContinuousModel& m, double x);

// Inverse cdf for p in [0, 1). Satisfies |cdf(quantile(p)) - p| <= 1e-9.
double quantile(const ContinuousModel& m, double p);

double sample(const ContinuousModel& m, Rng& rng);

// Draws from the model conditioned on being strictly below bound. Rejection
// sampling with a bounded number of attempts, then an exact inverse-cdf
// fallback. Throws std::invalid_argument when the model has no mass below
// bound.
double sample_below(const ContinuousModel& m, double bound, Rng& rng);

// Mean squared error between the sorted samples and the model quantiles at
// plotting positions (i - 0.5) / n. Requires n >= 2.
double fit_error(const ContinuousModel& m, std::span<const double> samples);

// Same metric for an already ascending-sorted input.
double fit_error_sorted(const ContinuousModel& m,
                        std::span<const double> sorted_samples);

// The model quantiles fit_error evaluates against: positions (i - 0.5) / n
// for i = 1..n, ascending.
std::vector<double> quantile_grid(const ContinuousModel& m, std::size_t n);

// Quantile of the standard normal; used by the half-normal inverse cdf and
// the gamma sampler. Accurate to ~1e-15 after one Halley refinement.
double norm_quantile(double p);

}  // namespace stackkit
