#pragma once

// Particle-count laws on Z_+. Heavy-tail families are specified by their
// tail T(k) = mu([k, inf)); the pmf is obtained by differencing, so the
// Theorem-style series consume tails with no normalization drift. Every
// family exposes a log-argument tail form so series with arguments like
// B^{n ln^2 n} never overflow.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "combust/rng.hpp"
#include "combust/series.hpp"
#include "combust/stats.hpp"

namespace combust {

// Counts saturate here; heavy tails put real mass above any integer range.
inline constexpr std::uint64_t kCountSaturation = std::uint64_t(1) << 62;

enum class DistKind { Delta, Geometric, Poisson, PowerLogTail, LogLogTail, Tabulated };

inline const char* to_string(DistKind k) {
  switch (k) {
    case DistKind::Delta: return "delta";
    case DistKind::Geometric: return "geometric";
    case DistKind::Poisson: return "poisson";
    case DistKind::PowerLogTail: return "power_log_tail";
    case DistKind::LogLogTail: return "log_log_tail";
    default: return "tabulated";
  }
}

// Generic inverse-tail sampler: X = max{k : T(k) > U}.
inline std::uint64_t sample_by_tail_inversion(const std::function<double(std::uint64_t)>& tail,
                                              RngStream& stream) {
  const double u = stream.next_double();
  if (tail(1) <= u) return 0;
  std::uint64_t lo = 1, hi = 2;
  while (tail(hi) > u) {
    if (hi >= kCountSaturation) return kCountSaturation;
    lo = hi;
    hi *= 2;
  }
  // invariant: tail(lo) > u >= tail(hi)
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (tail(mid) > u ? lo : hi) = mid;
  }
  return lo;
}

class CountDistribution {
 public:
  struct LogMomentResult {
    double partial;
    double tail_bound;  // remainder estimate when Finite, NaN otherwise
    Verdict verdict;
  };

  static CountDistribution delta(std::uint64_t m, bool allow_trivial = false) {
    if (m == 0 && !allow_trivial)
      throw std::invalid_argument("CountDistribution: mu(0) = 1 is the excluded trivial case");
    CountDistribution d(DistKind::Delta);
    d.m_ = m;
    return d;
  }

  static CountDistribution geometric(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("geometric: p must be in (0,1)");
    CountDistribution d(DistKind::Geometric);
    d.p_ = p;
    return d;
  }

  static CountDistribution poisson(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("poisson: lambda must be positive");
    CountDistribution d(DistKind::Poisson);
    d.lambda_ = lambda;
    return d;
  }

  // T(k) = min(1, c / ln^a(k+e)) for k >= 1.
  static CountDistribution power_log_tail(double a, double c) {
    if (!(a > 0.0) || !(c > 0.0)) throw std::invalid_argument("power_log_tail: a, c > 0");
    CountDistribution d(DistKind::PowerLogTail);
    d.a_ = a;
    d.c_ = c;
    return d;
  }

  // T(k) = min(1, c / ln(ln(k+e^e))) for k >= 1.
  static CountDistribution log_log_tail(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("log_log_tail: c > 0");
    CountDistribution d(DistKind::LogLogTail);
    d.c_ = c;
    return d;
  }

  // A bare table is an exact finite-support law (normalized). `truncated`
  // marks the table as a prefix of an unknown law: not samplable, and series
  // verdicts beyond it stay Inconclusive. A continuation supplies the tail
  // for k >= table size; the table is rescaled to mass 1 - cont.tail(K).
  static CountDistribution tabulated(std::vector<double> pmf, bool truncated = false,
                                     std::shared_ptr<CountDistribution> continuation = nullptr,
                                     bool allow_trivial = false) {
    if (pmf.empty()) throw std::invalid_argument("tabulated: empty pmf");
    for (double v : pmf)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("tabulated: pmf values must be finite and >= 0");
    if (truncated && continuation)
      throw std::invalid_argument("tabulated: truncated excludes a continuation");
    CountDistribution d(DistKind::Tabulated);
    double total = 0.0;
    for (double v : pmf) total += v;
    if (total <= 0.0) throw std::invalid_argument("tabulated: zero mass");
    double target = 1.0;
    if (continuation) {
      target = 1.0 - continuation->tail(pmf.size());
      if (target < 0.0) throw std::invalid_argument("tabulated: continuation mass exceeds 1");
    }
    if (!truncated) {
      for (double& v : pmf) v *= target / total;
    } else if (total > 1.0 + 1e-12) {
      throw std::invalid_argument("tabulated: truncated table mass exceeds 1");
    }
    d.table_ = std::move(pmf);
    d.truncated_ = truncated;
    d.cont_ = std::move(continuation);
    // suffix tails: tails_[k] = sum_{i>=k} table + beyond-table mass
    const double beyond = d.cont_ ? d.cont_->tail(d.table_.size())
                                  : (truncated ? std::max(0.0, 1.0 - total) : 0.0);
    d.table_tails_.assign(d.table_.size() + 1, beyond);
    for (std::size_t i = d.table_.size(); i-- > 0;)
      d.table_tails_[i] = d.table_tails_[i + 1] + d.table_[i];
    if (!allow_trivial && d.pmf(0) >= 1.0 - 1e-15)
      throw std::invalid_argument("CountDistribution: mu(0) = 1 is the excluded trivial case");
    return d;
  }

  DistKind kind() const { return kind_; }
  bool nontrivial() const { return pmf(0) < 1.0; }

  // mu([k, inf)). Exact for closed-form families.
  double tail(std::uint64_t k) const {
    switch (kind_) {
      case DistKind::Delta:
        return k <= m_ ? 1.0 : 0.0;
      case DistKind::Geometric:
        return std::exp(static_cast<double>(k) * std::log1p(-p_));
      case DistKind::Poisson:
        return k == 0 ? 1.0 : reg_lower_gamma(static_cast<double>(k), lambda_);
      case DistKind::PowerLogTail:
        return k == 0 ? 1.0
                      : std::min(1.0, c_ / std::pow(std::log(static_cast<double>(k) + kE), a_));
      case DistKind::LogLogTail:
        return k == 0 ? 1.0
                      : std::min(1.0, c_ / std::log(std::log(static_cast<double>(k) + kEE)));
      case DistKind::Tabulated:
        if (k < table_tails_.size()) return table_tails_[k];
        return cont_ ? cont_->tail(k) : table_tails_.back();
    }
    return 0.0;
  }

  // mu([x, inf)) for real x >= 0.
  double tail_at_real(double x) const {
    if (x <= 0.0) return 1.0;
    if (x < 9.0e18) return tail(static_cast<std::uint64_t>(std::ceil(x)));
    return std::exp(ln_tail_at_ln(std::log(x)));
  }

  // ln T at k = e^L, smooth in L; -inf where the tail is exactly zero.
  // Falls back to the integer formula when e^L is representable.
  double ln_tail_at_ln(double L) const {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    switch (kind_) {
      case DistKind::Delta:
        return L <= std::log(static_cast<double>(m_) + 0.5) ? 0.0 : -kInf;
      case DistKind::Geometric: {
        const double l1p = std::log1p(-p_);  // negative
        if (L > 709.0) return -kInf;
        return std::exp(L) * l1p;
      }
      case DistKind::Poisson: {
        if (L > 700.0) return -kInf;  // far beyond any meaningful mass
        const double k = std::exp(L);
        if (k < 1.0) return 0.0;
        return std::min(0.0, ln_reg_lower_gamma(k, lambda_));
      }
      case DistKind::PowerLogTail: {
        const double soft = L > 40.0 ? L : std::log(std::exp(L) + kE);
        return std::min(0.0, std::log(c_) - a_ * std::log(soft));
      }
      case DistKind::LogLogTail: {
        const double soft = L > 40.0 ? L : std::log(std::exp(L) + kEE);
        return std::min(0.0, std::log(c_) - std::log(std::log(soft)));
      }
      case DistKind::Tabulated: {
        const double x = L > 43.0 ? 9.1e18 : std::exp(L);
        if (x < static_cast<double>(table_tails_.size())) {
          const double t = tail(static_cast<std::uint64_t>(std::ceil(x)));
          return t > 0.0 ? std::log(t) : -kInf;
        }
        if (cont_) return cont_->ln_tail_at_ln(L);
        const double t = table_tails_.back();
        return t > 0.0 ? std::log(t) : -kInf;
      }
    }
    return -kInf;
  }

  // A usable analytic tail beyond any truncation?
  bool has_analytic_tail() const {
    if (kind_ != DistKind::Tabulated) return true;
    if (truncated_) return false;
    return true;  // exact finite support counts: the tail is exactly zero
  }

  double pmf(std::uint64_t k) const {
    switch (kind_) {
      case DistKind::Delta:
        return k == m_ ? 1.0 : 0.0;
      case DistKind::Geometric:
        return p_ * std::exp(static_cast<double>(k) * std::log1p(-p_));
      case DistKind::Poisson:
        return std::exp(-lambda_ + static_cast<double>(k) * std::log(lambda_) -
                        std::lgamma(static_cast<double>(k) + 1.0));
      case DistKind::Tabulated:
        if (k < table_.size()) return table_[k];
        return cont_ ? cont_->pmf(k) : 0.0;
      default:
        return std::max(0.0, tail(k) - tail(k + 1));
    }
  }

  double cdf(std::uint64_t k) const { return 1.0 - tail(k + 1); }

  // ln pmf at k = e^L via the smooth tail derivative; for the log-moment
  // probe only (closed-form families have exact forms).
  double ln_pmf_smooth_ln(double L) const {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    switch (kind_) {
      case DistKind::Delta:
        return -kInf;
      case DistKind::Geometric: {
        if (L > 709.0) return -kInf;
        return std::log(p_) + std::exp(L) * std::log1p(-p_);
      }
      case DistKind::Poisson: {
        if (L > 700.0) return -kInf;
        const double k = std::exp(L);
        return -lambda_ + k * std::log(lambda_) - std::lgamma(k + 1.0);
      }
      case DistKind::PowerLogTail: {
        // -dT/dk = a c / ((k+e) ln^{a+1}(k+e))
        const double soft = L > 40.0 ? L : std::log(std::exp(L) + kE);
        return std::log(a_ * c_) - L - (a_ + 1.0) * std::log(soft);
      }
      case DistKind::LogLogTail: {
        // -dT/dk = c / ((k+e^e) ln(k+e^e) ln^2 ln(k+e^e))
        const double soft = L > 40.0 ? L : std::log(std::exp(L) + kEE);
        return std::log(c_) - L - std::log(soft) - 2.0 * std::log(std::log(soft));
      }
      case DistKind::Tabulated:
        if (cont_) return cont_->ln_pmf_smooth_ln(L);
        return -kInf;
    }
    return -kInf;
  }

  std::uint64_t sample(RngStream& stream) const {
    switch (kind_) {
      case DistKind::Delta:
        return m_;
      case DistKind::Geometric: {
        const double u = stream.next_double();
        const double x = std::floor(std::log(u) / std::log1p(-p_));
        return x >= static_cast<double>(kCountSaturation) ? kCountSaturation
                                                          : static_cast<std::uint64_t>(x);
      }
      case DistKind::Poisson: {
        // Inverse CDF with multiplicative recurrence.
        double u = stream.next_double();
        double p = std::exp(-lambda_);
        std::uint64_t k = 0;
        double c = p;
        while (u > c && k < 40 + 4 * static_cast<std::uint64_t>(lambda_ + 40.0)) {
          ++k;
          p *= lambda_ / static_cast<double>(k);
          c += p;
        }
        return k;
      }
      case DistKind::Tabulated:
        if (truncated_)
          throw std::logic_error("tabulated: truncated table is not samplable");
        [[fallthrough]];
      default:
        return sample_by_tail_inversion([this](std::uint64_t k) { return tail(k); }, stream);
    }
  }

  // Probability generating function sum mu(k) x^k; +inf when divergent.
  double pgf(double x) const {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if (x < 0.0) throw std::invalid_argument("pgf: x >= 0 expected");
    switch (kind_) {
      case DistKind::Delta:
        return std::pow(x, static_cast<double>(m_));
      case DistKind::Geometric:
        return (1.0 - p_) * x < 1.0 ? p_ / (1.0 - (1.0 - p_) * x) : kInf;
      case DistKind::Poisson:
        return std::exp(lambda_ * (x - 1.0));
      case DistKind::Tabulated: {
        double s = 0.0, xv = 1.0;
        for (double v : table_) {
          s += v * xv;
          xv *= x;
        }
        if (cont_) {
          for (std::uint64_t k = table_.size(); k < table_.size() + 4000000; ++k) {
            const double t = cont_->pmf(k) * std::pow(x, static_cast<double>(k));
            s += t;
            if (x < 1.0 && std::pow(x, static_cast<double>(k)) < 1e-18) break;
            if (s > 1e12) return kInf;
          }
          if (x >= 1.0 && cont_->tail(4000000) > 0.0 && x > 1.0) return kInf;
        }
        return s;
      }
      default: {
        if (x >= 1.0) return x == 1.0 ? 1.0 : kInf;  // unbounded heavy tails
        return 1.0 - one_minus_pgf(x);
      }
    }
  }

  // 1 - sum mu(k) x^k = (1-x) sum_{k>=0} T(k+1) x^k, stable for x near 1.
  double one_minus_pgf(double x) const {
    if (x >= 1.0) return 0.0;
    const double delta = -std::log1p(-(1.0 - x));  // -ln x
    if (delta * 2.0e6 > 37.0) {
      // Direct summation reaches the geometric cutoff quickly.
      double s = 0.0, xv = 1.0;
      const std::uint64_t kmax = static_cast<std::uint64_t>(37.0 / delta) + 2;
      for (std::uint64_t k = 0; k <= kmax; ++k) {
        s += tail(k + 1) * xv;
        xv *= x;
      }
      return (1.0 - x) * s;
    }
    // Laplace form: sum T(k+1) x^k ~ (1/delta) int T(u/delta) e^-u du.
    double integral = 0.0;
    const int n = 600;
    const double lo = std::log(1e-8), hi = std::log(45.0);
    const double h = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) {
      const double lu = lo + i * h;
      const double u = std::exp(lu);
      const double t = std::exp(ln_tail_at_ln(lu - std::log(delta)));
      const double w = (i == 0 || i == n) ? 1.0 : ((i & 1) ? 4.0 : 2.0);
      integral += w * t * std::exp(-u) * u;  // du = u d(ln u)
    }
    integral *= h / 3.0;
    return std::min(1.0, (1.0 - x) * integral / delta);
  }

  // Laplace form of 1 - pgf(x) parameterized by ln(-ln x), for arguments
  // x = 1 - A^{-n} past double resolution: 1 - pgf ~ (1/delta) int T(u/delta) e^-u du * delta.
  double one_minus_pgf_from_ln_delta(double ln_delta) const {
    double integral = 0.0;
    const int n = 600;
    const double lo = std::log(1e-8), hi = std::log(45.0);
    const double h = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) {
      const double lu = lo + i * h;
      const double u = std::exp(lu);
      const double t = std::exp(ln_tail_at_ln(lu - ln_delta));
      const double w = (i == 0 || i == n) ? 1.0 : ((i & 1) ? 4.0 : 2.0);
      integral += w * t * std::exp(-u) * u;
    }
    integral *= h / 3.0;
    return std::min(1.0, integral);
  }

  LogMomentResult log_moment(std::uint64_t k_max) const {
    if (k_max < 2) throw std::invalid_argument("log_moment: k_max >= 2");
    SeriesSpec spec;
    spec.m_max = k_max;
    spec.term = [this](std::uint64_t k) {
      return k >= 2 ? pmf(k) * std::log(static_cast<double>(k)) : 0.0;
    };
    if (has_analytic_tail()) {
      spec.ln_term = [this](double lk) { return ln_pmf_smooth_ln(lk) + std::log(lk); };
    }
    const SeriesTrace tr = classify_series(spec);
    return {tr.checkpoints.back().partial_sum, tr.remainder_estimate, tr.verdict};
  }

  bool bounded_support() const {
    if (kind_ == DistKind::Delta) return true;
    if (kind_ == DistKind::Tabulated) return !cont_ && !truncated_;
    return false;
  }

  // Parameter access (io / reporting).
  std::uint64_t param_m() const { return m_; }
  double param_p() const { return p_; }
  double param_lambda() const { return lambda_; }
  double param_a() const { return a_; }
  double param_c() const { return c_; }
  const std::vector<double>& table() const { return table_; }
  bool truncated() const { return truncated_; }
  const std::shared_ptr<CountDistribution>& continuation() const { return cont_; }

 private:
  explicit CountDistribution(DistKind k) : kind_(k) {}

  static constexpr double kE = 2.718281828459045;
  static constexpr double kEE = 15.154262241479262;  // e^e

  DistKind kind_;
  std::uint64_t m_ = 0;
  double p_ = 0.5, lambda_ = 1.0, a_ = 1.0, c_ = 1.0;
  std::vector<double> table_;
  std::vector<double> table_tails_;
  bool truncated_ = false;
  std::shared_ptr<CountDistribution> cont_;
};

}  // namespace combust
