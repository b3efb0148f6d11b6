#pragma once

// Numeric classification of positive series with eventually-monotone terms.
//
// Verdicts combine two kinds of evidence:
//  - raw trend on exact partial sums at truncations m/4, m/2, 3m/4, m
//    (a ratio test on consecutive increments plus a Cauchy test);
//  - when the term has an analytic log-argument form, a probe that sums
//    geometric windows far past the truncation (integral test), escalating
//    once to log-doubled windows to separate slowly-varying series such as
//    sum 1/(n ln n) from sum 1/(n ln^2 n).
// Ambiguity yields Inconclusive, never a guess.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace combust {

enum class Verdict { Finite, Divergent, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Finite: return "Finite";
    case Verdict::Divergent: return "Divergent";
    default: return "Inconclusive";
  }
}

struct SeriesCheckpoint {
  std::uint64_t m;
  double partial_sum;
};

struct SeriesTrace {
  double base = 0.0;  // B, when the series is parameterized by one
  std::vector<SeriesCheckpoint> checkpoints;
  Verdict verdict = Verdict::Inconclusive;
  Verdict raw_trend = Verdict::Inconclusive;
  Verdict probe = Verdict::Inconclusive;
  double remainder_estimate = std::numeric_limits<double>::quiet_NaN();
  int probe_level = 0;  // 0: no analytic form, 1/2: deepest level used
  bool overflow_guard = false;
  std::string note;
};

struct SeriesSpec {
  // Exact term; called with non-decreasing m in [1, m_max], so it may carry
  // running state (log-space products).
  std::function<double(std::uint64_t)> term;
  // ln of the term at real index m = e^{lm}; empty when no analytic tail.
  std::function<double(double)> ln_term;
  std::uint64_t m_max = 100000;
  std::shared_ptr<bool> overflow_flag;  // optional; set by term closures
};

namespace series_detail {

// Composite Simpson of exp(y + ln_term(y)) over [ya, yb].
inline double window_mass(const std::function<double(double)>& ln_term, double ya, double yb,
                          int panels = 32) {
  const double h = (yb - ya) / panels;
  auto f = [&](double y) {
    const double lt = ln_term(y);
    if (!std::isfinite(lt)) {
      if (lt > 0) return std::numeric_limits<double>::infinity();
      return 0.0;  // -inf: exactly zero term
    }
    const double le = y + lt;
    if (le > 700.0) return std::numeric_limits<double>::infinity();
    if (le < -745.0) return 0.0;
    return std::exp(le);
  };
  double acc = f(ya) + f(yb);
  for (int i = 1; i < panels; ++i) acc += f(ya + i * h) * ((i & 1) ? 4.0 : 2.0);
  return acc * h / 3.0;
}

struct WindowAnalysis {
  Verdict verdict = Verdict::Inconclusive;
  double total = 0.0;
  double tail_extrapolation = 0.0;
  bool escalate = false;
};

inline WindowAnalysis analyze_windows(const std::vector<double>& inc) {
  WindowAnalysis out;
  double total = 0.0;
  bool any_inf = false, all_tiny = true;
  for (double v : inc) {
    if (std::isinf(v)) any_inf = true;
    if (v > 1e-300) all_tiny = false;
    total += v;
  }
  out.total = total;
  if (any_inf) {
    out.verdict = Verdict::Divergent;
    return out;
  }
  if (all_tiny) {
    out.verdict = Verdict::Finite;
    return out;
  }
  // Median ratio over the last half of strictly positive consecutive pairs.
  std::vector<double> ratios;
  for (std::size_t i = 1; i < inc.size(); ++i) {
    if (inc[i - 1] > 0.0) ratios.push_back(inc[i] / inc[i - 1]);
  }
  if (ratios.empty()) {
    out.verdict = Verdict::Finite;  // mass stopped; nothing left to sum
    return out;
  }
  std::vector<double> tail_r(ratios.begin() + ratios.size() / 2, ratios.end());
  std::sort(tail_r.begin(), tail_r.end());
  const double rho = tail_r[tail_r.size() / 2];
  if (rho <= 0.9) {
    out.verdict = Verdict::Finite;
    const double last = inc.back();
    out.tail_extrapolation = last * rho / (1.0 - rho);
    return out;
  }
  if (rho >= 0.999) {
    out.verdict = Verdict::Divergent;
    return out;
  }
  out.escalate = true;
  return out;
}

}  // namespace series_detail

inline SeriesTrace classify_series(const SeriesSpec& spec) {
  SeriesTrace tr;
  const std::uint64_t m_max = std::max<std::uint64_t>(spec.m_max, 8);
  const std::uint64_t q1 = m_max / 4, q2 = m_max / 2, q3 = 3 * (m_max / 4);

  double s = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  for (std::uint64_t m = 1; m <= m_max; ++m) {
    s += spec.term(m);
    if (m == q1) s1 = s;
    if (m == q2) s2 = s;
    if (m == q3) s3 = s;
  }
  tr.checkpoints = {{q1, s1}, {q2, s2}, {q3, s3}, {m_max, s}};

  // Raw trend per the truncation-only rules.
  const double i1 = s2 - s1, i2 = s3 - s2, i3 = s - s3;
  Verdict cauchy = Verdict::Inconclusive;
  if (i3 < 1e-9) {
    cauchy = Verdict::Finite;
  } else if (i3 > 1e-3 && i1 <= i2 * (1.0 + 1e-9) && i2 <= i3 * (1.0 + 1e-9)) {
    cauchy = Verdict::Divergent;
  }
  Verdict ratio = Verdict::Inconclusive;
  if (i1 > 0.0 && i2 > 0.0) {
    const double r1 = i2 / i1, r2 = i3 / i2;
    if (r1 < 0.9 && r2 < 0.9) ratio = Verdict::Finite;
    if (r1 >= 0.98 && r2 >= 0.98) ratio = Verdict::Divergent;
  } else if (i3 < 1e-12) {
    ratio = Verdict::Finite;
  }
  tr.raw_trend = (cauchy == ratio) ? cauchy : Verdict::Inconclusive;

  // Analytic probe.
  if (spec.ln_term) {
    using series_detail::analyze_windows;
    using series_detail::window_mass;
    const double y0 = std::log(static_cast<double>(m_max));
    const double h = std::log(4.0);
    std::vector<double> inc;
    inc.reserve(48);
    for (int j = 0; j < 48; ++j)
      inc.push_back(window_mass(spec.ln_term, y0 + j * h, y0 + (j + 1) * h));
    auto a1 = analyze_windows(inc);
    tr.probe_level = 1;
    if (!a1.escalate) {
      tr.probe = a1.verdict;
      if (a1.verdict == Verdict::Finite)
        tr.remainder_estimate = a1.total + a1.tail_extrapolation;
    } else {
      // Slowly-varying regime: windows doubling in y = ln m.
      std::vector<double> inc2;
      inc2.reserve(36);
      double y = y0;
      for (int j = 0; j < 36; ++j) {
        inc2.push_back(window_mass(spec.ln_term, y, 2.0 * y, 48));
        y *= 2.0;
      }
      auto a2 = analyze_windows(inc2);
      tr.probe_level = 2;
      tr.probe = a2.escalate ? Verdict::Inconclusive : a2.verdict;
      if (tr.probe == Verdict::Finite) tr.remainder_estimate = a2.total + a2.tail_extrapolation;
    }
  }

  if (spec.ln_term) {
    if (tr.probe != Verdict::Inconclusive) {
      tr.verdict = tr.probe;
      if (tr.raw_trend != Verdict::Inconclusive && tr.raw_trend != tr.probe)
        tr.note = "raw trend disagrees with analytic probe (truncation artifact)";
    } else {
      tr.verdict = tr.raw_trend;
      tr.note = "analytic probe inconclusive";
    }
  } else {
    tr.verdict = tr.raw_trend;
    tr.note = "no analytic tail; truncation-only verdict";
  }
  if (spec.overflow_flag && *spec.overflow_flag) tr.overflow_guard = true;
  return tr;
}

// Cumulative log-product helper: Phi(m) = sum_{n<=m} phi(n) with phi >= 0,
// exact up to n_exact and continued by an integral on a lazy node grid in
// w = ln ln n. Used for product-form series terms exp(-Phi(m)).
class LogProductAccumulator {
 public:
  LogProductAccumulator(double exact_prefix, double n_exact,
                        std::function<double(double)> phi_at_ln_n)
      : prefix_(exact_prefix), y0_(std::log(n_exact)), phi_ln_(std::move(phi_at_ln_n)) {
    node_w_.push_back(std::log(y0_));
    node_cum_.push_back(0.0);
  }

  // Phi at m = e^{lm}; saturates at kPhiCap (terms are 0 past that anyway).
  double at_ln(double lm) {
    if (lm <= y0_) return prefix_;
    const double w = std::log(lm);
    extend_to(w);
    if (saturated_ && w >= node_w_.back()) return kPhiCap;
    // Locate the node interval and finish with one Simpson panel.
    auto it = std::upper_bound(node_w_.begin(), node_w_.end(), w);
    const std::size_t i = static_cast<std::size_t>(it - node_w_.begin()) - 1;
    const double cum = node_cum_[i] + panel(node_w_[i], w);
    return std::min(prefix_ + cum, kPhiCap);
  }

  static constexpr double kPhiCap = 1000.0;  // e^{-1000} == 0 in double

 private:
  // Integrand in w: phi(n) dn = phi(e^y) e^y dy = phi(e^y) e^y y dw, y = e^w.
  double f(double w) const {
    const double y = std::exp(w);
    const double p = phi_ln_(y);
    if (p <= 0.0) return 0.0;
    const double le = std::log(p) + y + std::log(y);
    if (le > 700.0) return std::numeric_limits<double>::infinity();
    return std::exp(le);
  }
  double panel(double wa, double wb) const {
    if (wb <= wa) return 0.0;
    const double wm = 0.5 * (wa + wb);
    return (wb - wa) / 6.0 * (f(wa) + 4.0 * f(wm) + f(wb));
  }
  void extend_to(double w) {
    while (!saturated_ && node_w_.back() < w) {
      const double wa = node_w_.back();
      const double wb = wa + kStep;
      const double inc = panel(wa, wb);
      const double cum = node_cum_.back() + inc;
      node_w_.push_back(wb);
      node_cum_.push_back(cum);
      if (prefix_ + cum >= kPhiCap || !std::isfinite(cum)) saturated_ = true;
    }
  }

  static constexpr double kStep = 0.02;
  double prefix_;
  double y0_;
  std::function<double(double)> phi_ln_;
  std::vector<double> node_w_, node_cum_;
  bool saturated_ = false;
};

}  // namespace combust
