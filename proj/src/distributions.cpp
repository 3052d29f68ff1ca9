#include "stackkit/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stackkit/kernels.hpp"

namespace stackkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Regularized lower incomplete gamma P(k, x): power series below the
// diagonal, Lentz continued fraction for the upper tail otherwise.
double gamma_p(double k, double x) {
  if (x <= 0.0) return 0.0;
  double log_prefix = -x + k * std::log(x) - std::lgamma(k);
  if (x < k + 1.0) {
    double ap = k;
    double term = 1.0 / k;
    double total = term;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      total += term;
      if (std::abs(term) < std::abs(total) * 1e-16) break;
    }
    return std::min(1.0, total * std::exp(log_prefix));
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - k;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - k);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::max(0.0, 1.0 - std::exp(log_prefix) * h);
}

double gamma_pdf_unit_scale(double k, double x) {
  if (x <= 0.0) return 0.0;
  return std::exp((k - 1.0) * std::log(x) - x - std::lgamma(k));
}

// Inverse of gamma_p in x for fixed k, Newton iteration inside a maintained
// bracket with bisection fallback. hint seeds the first iterate when the
// caller solves an ascending sequence of probabilities.
double gamma_quantile_unit_scale(double k, double p, double hint) {
  if (p <= 0.0) return 0.0;
  double x = hint;
  if (!(x > 0.0) || !std::isfinite(x)) {
    double z = norm_quantile(p);
    double t = 1.0 - 1.0 / (9.0 * k) + z / (3.0 * std::sqrt(k));
    x = k * t * t * t;
    if (!(x > 0.0) || !std::isfinite(x)) x = k;
  }
  double lo = 0.0;
  double hi = std::max(x * 2.0, k + 1.0);
  while (gamma_p(k, hi) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return hi;
  }
  x = std::clamp(x, lo, hi);
  for (int i = 0; i < 200; ++i) {
    double f = gamma_p(k, x) - p;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    if (std::abs(f) <= 1e-13) break;
    double deriv = gamma_pdf_unit_scale(k, x);
    double next = deriv > 0.0 ? x - f / deriv : lo;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * (1.0 + hi)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

double sample_gamma_unit_scale(double k, Rng& rng) {
  if (k < 1.0) {
    double boost = std::pow(rng.uniform_open(), 1.0 / k);
    return sample_gamma_unit_scale(k + 1.0, rng) * boost;
  }
  const double d = k - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double z;
    double v;
    do {
      z = norm_quantile(rng.uniform_open());
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    double u = rng.uniform_open();
    double z2 = z * z;
    if (u < 1.0 - 0.0331 * z2 * z2) return d * v;
    if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::uniform: return "uniform";
    case Family::gamma: return "gamma";
    case Family::gpd: return "gpd";
    case Family::half_normal: return "half_normal";
  }
  return "unknown";
}

Family family_from_name(const std::string& name) {
  if (name == "uniform") return Family::uniform;
  if (name == "gamma") return Family::gamma;
  if (name == "gpd") return Family::gpd;
  if (name == "half_normal") return Family::half_normal;
  throw std::invalid_argument("unknown family name: " + name);
}

ContinuousModel ContinuousModel::make_uniform(double a, double b) {
  if (!(b > a)) throw std::invalid_argument("uniform needs b > a");
  ContinuousModel m;
  m.family = Family::uniform;
  m.a = a;
  m.b = b;
  return m;
}

ContinuousModel ContinuousModel::make_gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw std::invalid_argument("gamma needs shape > 0 and scale > 0");
  ContinuousModel m;
  m.family = Family::gamma;
  m.shape = shape;
  m.scale = scale;
  return m;
}

ContinuousModel ContinuousModel::make_gpd(double shape, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("gpd needs scale > 0");
  ContinuousModel m;
  m.family = Family::gpd;
  m.shape = shape;
  m.scale = scale;
  m.heavy_tail = shape >= 0.5;
  return m;
}

ContinuousModel ContinuousModel::make_half_normal(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("half_normal needs scale > 0");
  ContinuousModel m;
  m.family = Family::half_normal;
  m.scale = scale;
  return m;
}

Moments moments(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("moments of empty sample");
  auto n = xs.size();
  Moments m;
  m.count = n;
  m.mean = kernels::sum(xs.data(), n) / static_cast<double>(n);
  m.variance =
      kernels::sum_sq_dev(xs.data(), n, m.mean) / static_cast<double>(n);
  return m;
}

ContinuousModel mom_fit(Family f, const Moments& m) {
  switch (f) {
    case Family::uniform: {
      if (!(m.variance > 0.0)) throw FitError("uniform fit needs variance > 0");
      double h = std::sqrt(3.0 * m.variance);
      return ContinuousModel::make_uniform(m.mean - h, m.mean + h);
    }
    case Family::gamma: {
      if (!(m.mean > 0.0) || !(m.variance > 0.0))
        throw FitError("gamma fit needs mean > 0 and variance > 0");
      return ContinuousModel::make_gamma(m.mean * m.mean / m.variance,
                                         m.variance / m.mean);
    }
    case Family::gpd: {
      if (!(m.mean > 0.0) || !(m.variance > 0.0))
        throw FitError("gpd fit needs mean > 0 and variance > 0");
      double xi = 0.5 * (1.0 - m.mean * m.mean / m.variance);
      return ContinuousModel::make_gpd(xi, m.mean * (1.0 - xi));
    }
    case Family::half_normal: {
      if (!(m.mean > 0.0)) throw FitError("half_normal fit needs mean > 0");
      return ContinuousModel::make_half_normal(
          m.mean * std::sqrt(std::acos(-1.0) / 2.0));
    }
  }
  throw std::invalid_argument("unknown family");
}

double cdf(const ContinuousModel& m, double x) {
  switch (m.family) {
    case Family::uniform:
      if (x <= m.a) return 0.0;
      if (x >= m.b) return 1.0;
      return (x - m.a) / (m.b - m.a);
    case Family::gamma:
      if (x <= 0.0) return 0.0;
      return gamma_p(m.shape, x / m.scale);
    case Family::gpd: {
      if (x <= 0.0) return 0.0;
      if (m.shape == 0.0) return -std::expm1(-x / m.scale);
      double t = m.shape * x / m.scale;
      if (t <= -1.0) return 1.0;
      return -std::expm1(-std::log1p(t) / m.shape);
    }
    case Family::half_normal:
      if (x <= 0.0) return 0.0;
      return std::erf(x / (m.scale * std::sqrt(2.0)));
  }
  throw std::invalid_argument("unknown family");
}

double norm_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  // Acklam's rational approximation, then one Halley step against erfc.
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2.0 * std::acos(-1.0)) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double quantile(const ContinuousModel& m, double p) {
  if (!(p >= 0.0) || !(p <= 1.0))
    throw std::invalid_argument("quantile needs p in [0, 1]");
  switch (m.family) {
    case Family::uniform:
      return m.a + p * (m.b - m.a);
    case Family::gamma:
      if (p == 1.0) return kInf;
      return m.scale * gamma_quantile_unit_scale(m.shape, p, 0.0);
    case Family::gpd:
      if (p == 1.0) return m.shape < 0.0 ? -m.scale / m.shape : kInf;
      if (m.shape == 0.0) return -m.scale * std::log1p(-p);
      return m.scale * std::expm1(-m.shape * std::log1p(-p)) / m.shape;
    case Family::half_normal:
      if (p == 1.0) return kInf;
      return m.scale * norm_quantile(0.5 * (1.0 + p));
  }
  throw std::invalid_argument("unknown family");
}

double sample(const ContinuousModel& m, Rng& rng) {
  if (m.family == Family::gamma)
    return m.scale * sample_gamma_unit_scale(m.shape, rng);
  return quantile(m, rng.uniform());
}

double sample_below(const ContinuousModel& m, double bound, Rng& rng) {
  double mass = cdf(m, bound);
  if (!(mass > 0.0))
    throw std::invalid_argument("sample_below: model has no mass below bound");
  for (int attempt = 0; attempt < 64; ++attempt) {
    double s = sample(m, rng);
    if (s < bound) return s;
  }
  double s = quantile(m, rng.uniform() * mass);
  if (s >= bound) s = std::nextafter(bound, 0.0);
  return s;
}

std::vector<double> quantile_grid(const ContinuousModel& m, std::size_t n) {
  std::vector<double> grid(n);
  double inv_n = 1.0 / static_cast<double>(n);
  if (m.family == Family::gamma) {
    // Ascending probabilities let each solve warm-start from the previous.
    double hint = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double p = (static_cast<double>(i) + 0.5) * inv_n;
      hint = gamma_quantile_unit_scale(m.shape, p, hint);
      grid[i] = m.scale * hint;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      grid[i] = quantile(m, (static_cast<double>(i) + 0.5) * inv_n);
  }
  return grid;
}

double fit_error_sorted(const ContinuousModel& m,
                        std::span<const double> sorted_samples) {
  auto n = sorted_samples.size();
  if (n < 2) throw std::invalid_argument("fit_error needs at least 2 samples");
  auto grid = quantile_grid(m, n);
  return kernels::sum_sq_diff(sorted_samples.data(), grid.data(), n) /
         static_cast<double>(n);
}

double fit_error(const ContinuousModel& m, std::span<const double> samples) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return fit_error_sorted(m, sorted);
}

}  // namespace stackkit
