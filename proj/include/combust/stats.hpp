#pragma once

// Small numeric/statistics toolbox: regularized incomplete gamma (Erlang and
// Poisson tails), normal interval mass, KS distance, running moments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace combust {

// Regularized lower incomplete gamma P(a, x) = gamma(a,x) / Gamma(a).
// Series for x < a+1, continued fraction otherwise.
inline double reg_lower_gamma(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("reg_lower_gamma: bad arguments");
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 10000; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Lentz continued fraction for Q(a,x); P = 1 - Q.
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

// ln of the regularized UPPER gamma Q(a,x) for the deep tail (x >> a would be
// the lower tail; here we need the upper tail of a Poisson count, i.e. the
// lower-gamma value when it underflows).
inline double ln_reg_lower_gamma(double a, double x) {
  const double p = reg_lower_gamma(a, x);
  if (p > 1e-280) return std::log(p);
  // Leading series term: P(a,x) ~ e^{-x} x^a / Gamma(a+1) * 1/(1 - x/(a+1)).
  const double lead = -x + a * std::log(x) - std::lgamma(a + 1.0);
  const double corr = (x < a + 1.0) ? -std::log1p(-x / (a + 1.0)) : 0.0;
  return lead + corr;
}

// Mass of the standard normal on [-1, 1]; defined at run time from erf.
inline double normal_central_mass() { return std::erf(1.0 / std::sqrt(2.0)); }

struct RunningMoments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_error() const {
    return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

inline double binomial_sigma(double p, std::uint64_t n) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_tail(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-18) break;
    sign = -sign;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

// KS distance between the empirical CDF of integer samples and an analytic CDF.
// Conservative when applied to discrete laws.
struct KsResult {
  double statistic;
  double p_value;
};

// `censor_at` skips atoms at or above a cap from the sup (saturated draws of
// very heavy tails); conservative, the restricted sup only shrinks D.
inline KsResult ks_test_counts(std::vector<std::uint64_t> samples,
                               const std::function<double(std::uint64_t)>& cdf,
                               std::uint64_t censor_at =
                                   std::numeric_limits<std::uint64_t>::max()) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const std::uint64_t k = samples[i];
    if (k >= censor_at) {
      i = j;
      continue;
    }
    // at an atom the ECDF jumps from lo to hi; compare against F(k) on the
    // right and the left limit F(k-1) on the left
    const double f_hi = cdf(k);
    const double f_lo = k == 0 ? 0.0 : cdf(k - 1);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(j) / n;
    d = std::max(d, std::max(std::fabs(f_hi - hi), std::fabs(f_lo - lo)));
    i = j;
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  return {d, kolmogorov_tail(lambda)};
}

// Least-squares slope of y against x.
inline double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (nn * sxy - sx * sy) / denom;
}

}  // namespace combust
