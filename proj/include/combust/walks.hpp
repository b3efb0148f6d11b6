#pragma once

// Rate-1 continuous-time simple random walk primitives: the two-sided bracket
// for the probability of sustained speed, the fast-jump-count tail, Erlang
// tails, and truncated samplers for the speed records ell^(A) and W_A whose
// stopping rules come from those same bounds, so every sample carries a
// quantified residual confidence.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "combust/dist.hpp"
#include "combust/rng.hpp"
#include "combust/stats.hpp"

namespace combust {

struct SpeedTailBounds {
  double lower;
  double upper;  // may exceed 1; callers clamp where a probability is needed
};

// Bracket for P{exists t: S_t/t >= 1/eps, S_t >= n}, one-dimensional walk:
//   lower = eps^n e^{(1-eps)n} / (e 2^n sqrt(n))
//   upper = (eps e^{1-eps})^n / ((1-eps)(1 - eps e^{1-eps}) sqrt(n))
inline SpeedTailBounds speed_tail_bounds(std::uint64_t n, double eps) {
  if (n < 1 || !(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("speed_tail_bounds: n >= 1, eps in (0,1)");
  const double nn = static_cast<double>(n);
  const double ln_core = std::log(eps) + (1.0 - eps);
  const double lower = std::exp(nn * (ln_core - std::log(2.0)) - 1.0 - 0.5 * std::log(nn));
  const double q = eps * std::exp(1.0 - eps);  // < 1 on (0,1)
  const double upper =
      std::exp(nn * ln_core - 0.5 * std::log(nn)) / ((1.0 - eps) * (1.0 - q));
  return {lower, upper};
}

// P{rho_A >= n} <= (eps e^{1-eps})^n, eps = 1/A, valid once
// (1-eps)(1-eps e^{1-eps}) sqrt(2 pi n) > 1; returns 1 below the threshold.
inline double rho_tail_bound(std::uint64_t n, double a) {
  if (!(a > 1.0)) throw std::invalid_argument("rho_tail_bound: A > 1");
  const double eps = 1.0 / a;
  const double q = eps * std::exp(1.0 - eps);
  const double validity = (1.0 - eps) * (1.0 - q) * std::sqrt(6.283185307179586 * n);
  if (!(validity > 1.0)) return 1.0;
  return std::exp(static_cast<double>(n) * std::log(q));
}

// Chain bound sum_{m>=n} P{tau_m <= m eps} <= (eps e^{1-eps})^n /
// ((1-eps)(1-eps e^{1-eps}) sqrt(2 pi n)); valid for every n >= 1 and the
// basis of the samplers' stopping rules.
inline double rho_tail_sum_bound(double n, double eps) {
  if (!(n >= 1.0)) return 1.0;
  const double q = eps * std::exp(1.0 - eps);
  return std::exp(n * std::log(q)) /
         ((1.0 - eps) * (1.0 - q) * std::sqrt(6.283185307179586 * n));
}

// P{tau_m <= m eps}: Erlang(m, 1) CDF at m*eps.
inline double erlang_tail(std::uint64_t m, double eps) {
  if (m < 1) throw std::invalid_argument("erlang_tail: m >= 1");
  return reg_lower_gamma(static_cast<double>(m), static_cast<double>(m) * eps);
}

struct SpeedRecord {
  std::uint64_t value = 0;
  double confidence = 0.0;  // residual probability the true record is larger
};

namespace walks_detail {

// One-dimensional walk record max{S at a jump time : S >= A t} v 0, stopped
// once the behind-schedule residual drops below stop_tol.
inline std::uint64_t speed_record_single(double a, double stop_tol, RngStream& stream,
                                         double* residual_out = nullptr) {
  const double eps = 1.0 / a;
  double t = 0.0;
  std::int64_t p = 0;
  std::uint64_t record = 0;
  for (std::uint64_t jumps = 1; jumps <= (std::uint64_t(1) << 40); ++jumps) {
    t += stream.exponential();
    p += (stream.next_u64() & 1u) ? 1 : -1;
    if (p >= 1 && static_cast<double>(p) >= a * t)
      record = std::max<std::uint64_t>(record, static_cast<std::uint64_t>(p));
    const double slack = a * t - static_cast<double>(p);
    if (slack > 0.0) {
      const double n0 = std::floor(slack) + 1.0;
      const double res = rho_tail_sum_bound(n0, eps);
      if (res <= stop_tol) {
        if (residual_out) *residual_out = res;
        return record;
      }
    }
  }
  if (residual_out) *residual_out = 1.0;
  return record;
}

// Jump-count record max{n : tau_n <= n/A} v 0 for one walk.
inline std::uint64_t jump_record_single(double a, double stop_tol, RngStream& stream,
                                        double* residual_out = nullptr) {
  const double eps = 1.0 / a;
  double t = 0.0;
  std::uint64_t record = 0;
  for (std::uint64_t n = 1; n <= (std::uint64_t(1) << 40); ++n) {
    t += stream.exponential();
    if (t <= static_cast<double>(n) * eps) record = n;
    const double slack = a * t - static_cast<double>(n);
    if (slack > 0.0) {
      const double n0 = std::floor(slack) + 1.0;
      const double res = rho_tail_sum_bound(n0, eps);
      if (res <= stop_tol) {
        if (residual_out) *residual_out = res;
        return record;
      }
    }
  }
  if (residual_out) *residual_out = 1.0;
  return record;
}

}  // namespace walks_detail

// ell^(A) over eta independent walks; eta = 0 gives the empty-max convention 0.
inline SpeedRecord ell_A_sample(std::uint64_t eta, double a, double tol, RngStream& stream) {
  if (!(a > 1.0)) throw std::invalid_argument("ell_A_sample: A > 1");
  SpeedRecord rec;
  if (eta == 0) return rec;
  const double per_walk = tol / static_cast<double>(eta);
  for (std::uint64_t j = 0; j < eta; ++j) {
    double res = 0.0;
    const std::uint64_t v = walks_detail::speed_record_single(a, per_walk, stream, &res);
    rec.value = std::max(rec.value, v);
    rec.confidence += res;
  }
  return rec;
}

// W_A over eta walks, purely in jump counts (dimension-free).
inline SpeedRecord w_A_sample(std::uint64_t eta, double a, double tol, RngStream& stream) {
  if (!(a > 1.0)) throw std::invalid_argument("w_A_sample: A > 1");
  SpeedRecord rec;
  if (eta == 0) return rec;
  const double per_walk = tol / static_cast<double>(eta);
  for (std::uint64_t j = 0; j < eta; ++j) {
    double res = 0.0;
    const std::uint64_t v = walks_detail::jump_record_single(a, per_walk, stream, &res);
    rec.value = std::max(rec.value, v);
    rec.confidence += res;
  }
  return rec;
}

// Bracket for r_n^{(A)} = P{ell^(A) >= n} from the per-particle speed bracket
// composed through the complement-and-power structure:
//   1 - pgf(1 - lower_n) <= r_n <= 1 - pgf(1 - min(upper_n, 1)).
struct TailBracket {
  double lower;
  double upper;
};

inline TailBracket r_A_bracket(std::uint64_t n, const CountDistribution& mu, double a) {
  if (!(a > 1.0)) throw std::invalid_argument("r_A_bracket: A > 1");
  const SpeedTailBounds s = speed_tail_bounds(n, 1.0 / a);
  const double lo = std::max(0.0, std::min(1.0, s.lower));
  const double hi = std::max(0.0, std::min(1.0, s.upper));
  return {1.0 - mu.pgf(1.0 - lo), 1.0 - mu.pgf(1.0 - hi)};
}

// P{chi_{sqrt(q)} >= q}: the walk stays below sqrt(q) up to time q. The
// diffusive limit of this probability is the central normal mass u; the gap
// bound leans on the (1 +- eps) u sandwich holding at the q in use.
inline double central_hitting_probability(double q, std::uint64_t trials, RngStream& stream) {
  const double level = std::ceil(std::sqrt(q));
  std::uint64_t stayed_below = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    double t = 0.0;
    std::int64_t pos = 0;
    bool hit = false;
    while (true) {
      t += stream.exponential();
      if (t > q) break;
      pos += (stream.next_u64() & 1u) ? 1 : -1;
      if (pos >= static_cast<std::int64_t>(level)) {
        hit = true;
        break;
      }
    }
    stayed_below += hit ? 0 : 1;
  }
  return static_cast<double>(stayed_below) / static_cast<double>(trials);
}

struct SandwichCheck {
  double q;
  double empirical;
  bool inside;  // within [(1-eps) u, (1+eps) u]
};

// Empirical q-range where the central sandwich holds; there is no sharp
// theoretical threshold to assert, so runs report what they verified.
inline std::vector<SandwichCheck> gap_sandwich_range(double eps,
                                                     const std::vector<double>& q_grid,
                                                     std::uint64_t trials, RngStream& stream) {
  const double u = normal_central_mass();
  std::vector<SandwichCheck> out;
  for (double q : q_grid) {
    const double p = central_hitting_probability(q, trials, stream);
    out.push_back({q, p, p >= (1.0 - eps) * u && p <= (1.0 + eps) * u});
  }
  return out;
}

struct GapTailBound {
  double c_eps;  // sum mu(k) ((1+eps) u)^k
  double value;  // c_eps^{sqrt(q)}
};

struct CEpsNotContractive : std::runtime_error {
  explicit CEpsNotContractive(double c)
      : std::runtime_error("gap tail bound unavailable: c_eps = " + std::to_string(c) +
                           " >= 1") {}
};

// P{sigma_x - sigma_{x-1} >= q} <= c_eps^{sqrt(q)} with
// c_eps = sum mu(k) ((1+eps) u)^k and u the standard normal mass of [-1,1].
inline GapTailBound gap_tail_bound(double q, const CountDistribution& mu, double eps) {
  if (!(q > 0.0) || !(eps > 0.0)) throw std::invalid_argument("gap_tail_bound: q, eps > 0");
  const double u = normal_central_mass();
  const double c = mu.pgf((1.0 + eps) * u);
  if (!(c < 1.0)) throw CEpsNotContractive(c);
  return {c, std::exp(std::sqrt(q) * std::log(c))};
}

}  // namespace combust
