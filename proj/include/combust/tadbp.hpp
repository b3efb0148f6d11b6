#pragma once

// Totally asymmetric discrete Boolean percolation on Z and Z_+.
// Site x is wet when some y < x has y + psi_y >= x; on Z_+ the origin is wet
// by convention. The reach chain Y_m = psi_m v (Y_{m-1} - 1) carries the
// whole geometry: x >= 1 is wet iff Y_{x-1} >= 1, components are the
// excursions of Y from 0, and the recurrence class of Y decides between a
// positive dry fraction, an almost-full wet regime, and an infinite cluster.
//
// Note the source text's side remark "k is dry iff Y_k = 0" is off by one
// against the definitions; everything here uses the definition-level
// identity (wet(x) <=> Y_{x-1} >= 1), which the pairwise oracle confirms.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "combust/dist.hpp"
#include "combust/rng.hpp"
#include "combust/series.hpp"

namespace combust {

// A Z_+-valued law given by its tail r(k) = P{psi >= k}; adapts both
// CountDistribution and hand-written tails (the chain-classification
// examples are most natural as tails).
struct TailLaw {
  std::function<double(std::uint64_t)> tail;           // r(k), r(0) = 1, non-increasing
  std::function<double(double)> ln_tail_at_ln;         // optional smooth form
  std::string name;

  static TailLaw from_distribution(const CountDistribution& d, std::string label = {}) {
    TailLaw law;
    law.tail = [d](std::uint64_t k) { return d.tail(k); };
    if (d.has_analytic_tail()) law.ln_tail_at_ln = [d](double l) { return d.ln_tail_at_ln(l); };
    law.name = label.empty() ? to_string(d.kind()) : std::move(label);
    return law;
  }

  std::uint64_t sample(RngStream& stream) const {
    return sample_by_tail_inversion(tail, stream);
  }
  double p0() const { return 1.0 - tail(1); }
};

enum class Domain { Z, ZPlus };

struct PsiField {
  Domain domain = Domain::ZPlus;
  std::int64_t window_lo = 0;  // site index of psi[0]
  std::vector<std::uint64_t> psi;
  // left padding used for domain Z (pad values prepended internally)
  std::uint64_t pad = 0;
  bool edge_uncertain = false;  // no pad size could bound the edge error
  std::string source;
};

struct TadbpSample {
  PsiField field;
  std::vector<std::uint8_t> wet;       // per site of the window
  std::vector<std::uint64_t> y_chain;  // Y at each site of the window
  // component k occupies [intervals[k].first, intervals[k].second]; on ZPlus
  // the first starts at the origin, later ones start at their (dry) leftmost
  // site
  std::vector<std::pair<std::int64_t, std::int64_t>> components;
  std::uint64_t dry_count = 0;
  bool edge_uncertain = false;
};

inline PsiField sample_field(const TailLaw& law, Domain domain, std::int64_t window_lo,
                             std::size_t n, RngStream stream, std::uint64_t pad = 0) {
  if (n == 0) throw std::invalid_argument("sample_field: empty window");
  PsiField f;
  f.domain = domain;
  f.window_lo = window_lo;
  f.pad = domain == Domain::Z ? pad : 0;
  f.psi.reserve(n + f.pad);
  for (std::size_t i = 0; i < n + f.pad; ++i) f.psi.push_back(law.sample(stream));
  f.source = law.name;
  return f;
}

// Left pad size so that a fountain from beyond the pad reaching the window
// has probability below eps per site: smallest l with r(l) < eps.
inline std::uint64_t pad_for_law(const TailLaw& law, double eps = 1e-9,
                                 std::uint64_t cap = 1u << 20) {
  std::uint64_t lo = 1, hi = 2;
  if (law.tail(1) < eps) return 1;
  while (law.tail(hi) >= eps) {
    if (hi >= cap) return 0;  // no usable pad; callers flag edge sites
    hi *= 2;
  }
  lo = hi / 2;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (law.tail(mid) >= eps ? lo : hi) = mid;
  }
  return hi;
}

// Single left-to-right pass: wet labels, Y chain, components.
inline TadbpSample wet_dry(PsiField field) {
  TadbpSample s;
  const std::size_t pad = field.pad;
  const std::size_t n = field.psi.size() - pad;
  s.wet.assign(n, 0);
  s.y_chain.assign(n, 0);

  // Y over pad + window; pad only feeds the running value.
  std::uint64_t y = 0;
  bool have_y = false;
  for (std::size_t i = 0; i < field.psi.size(); ++i) {
    const std::uint64_t psi = field.psi[i];
    if (!have_y) {
      y = psi;
      have_y = true;
    } else {
      y = std::max(psi, y > 0 ? y - 1 : 0);
    }
    if (i >= pad) {
      const std::size_t j = i - pad;
      s.y_chain[j] = y;
      if (j == 0) {
        // window start: wet by convention on ZPlus; on Z decided by the pad
        s.wet[j] = field.domain == Domain::ZPlus ? 1 : 0;
      } else {
        s.wet[j] = s.y_chain[j - 1] >= 1 ? 1 : 0;
      }
    }
  }
  if (field.domain == Domain::Z) {
    // First window site on Z: wet iff some pad site reaches it.
    std::uint64_t reach = 0;
    for (std::size_t i = 0; i < pad; ++i)
      reach = std::max(reach, field.psi[i] >= (pad - i) ? field.psi[i] - (pad - i) + 1 : 0);
    s.wet[0] = reach >= 1 ? 1 : 0;
    s.edge_uncertain = pad == 0;
    field.edge_uncertain = pad == 0;
  }

  for (std::size_t j = 0; j < n; ++j)
    if (!s.wet[j]) ++s.dry_count;

  // Components: a new one starts at every dry site (and at the window start).
  std::int64_t start = field.window_lo;
  for (std::size_t j = 1; j < n; ++j) {
    if (!s.wet[j]) {
      s.components.emplace_back(start, field.window_lo + static_cast<std::int64_t>(j) - 1);
      start = field.window_lo + static_cast<std::int64_t>(j);
    }
  }
  s.components.emplace_back(start, field.window_lo + static_cast<std::int64_t>(n) - 1);
  s.field = std::move(field);
  return s;
}

struct ExactFraction {
  double value;
  double error_bound;       // width of the [lower, upper] bracket around value
  bool certain_zero = false;  // divergent sum r_k forces the product to 0
};

// prod_{k=1..K} (1 - r_k), with a remainder bracket from the analytic tail
// when available: exp(-sum_{k>K} r_k/(1-r_K)) <= prod_{k>K}(1-r_k) <= exp(-sum_{k>K} r_k).
inline ExactFraction dry_fraction_exact(const TailLaw& law, std::uint64_t K) {
  double log_prod = 0.0;
  double r_last = 0.0;
  for (std::uint64_t k = 1; k <= K; ++k) {
    const double r = law.tail(k);
    if (r >= 1.0) return {0.0, 0.0, true};
    log_prod += std::log1p(-r);
    r_last = r;
  }
  double rem = 0.0;
  bool have_rem = false;
  if (law.ln_tail_at_ln) {
    SeriesSpec spec;
    spec.m_max = K;
    spec.term = [&law](std::uint64_t k) { return law.tail(k); };
    spec.ln_term = law.ln_tail_at_ln;
    const SeriesTrace tr = classify_series(spec);
    if (tr.verdict == Verdict::Divergent) return {0.0, 0.0, true};
    if (tr.verdict == Verdict::Finite && std::isfinite(tr.remainder_estimate)) {
      rem = tr.remainder_estimate;
      have_rem = true;
    }
  }
  const double value = std::exp(log_prod);
  if (!have_rem) {
    // geometric extrapolation of the last tail value as a coarse remainder
    rem = r_last > 0.0 && r_last < 0.5 ? r_last / (1.0 - r_last) : r_last * 2.0;
  }
  const double lower = value * std::exp(-rem / std::max(1e-12, 1.0 - r_last));
  return {value, value - lower, false};
}

inline ExactFraction isolated_fraction_exact(const TailLaw& law, std::uint64_t K) {
  ExactFraction f = dry_fraction_exact(law, K);
  const double p0 = law.p0();
  f.value *= p0;
  f.error_bound *= p0;
  return f;
}

enum class ChainClass { PositiveRecurrent, NullRecurrent, Transient, Inconclusive };

inline const char* to_string(ChainClass c) {
  switch (c) {
    case ChainClass::PositiveRecurrent: return "PositiveRecurrent";
    case ChainClass::NullRecurrent: return "NullRecurrent";
    case ChainClass::Transient: return "Transient";
    default: return "Inconclusive";
  }
}

// Trichotomy: positive recurrent iff sum r_k < inf; transient iff
// sum_n prod_{k<=n}(1-r_k) < inf; null recurrent otherwise.
inline ChainClass classify_chain(const TailLaw& law, std::uint64_t K = 100000) {
  SeriesSpec mean_spec;
  mean_spec.m_max = K;
  mean_spec.term = [&law](std::uint64_t k) { return law.tail(k); };
  if (law.ln_tail_at_ln) mean_spec.ln_term = law.ln_tail_at_ln;
  const Verdict mean_v = classify_series(mean_spec).verdict;
  if (mean_v == Verdict::Finite) return ChainClass::PositiveRecurrent;

  SeriesSpec prod_spec;
  prod_spec.m_max = K;
  auto log_prod = std::make_shared<double>(0.0);
  prod_spec.term = [&law, log_prod](std::uint64_t n) {
    const double r = law.tail(n);
    *log_prod += r >= 1.0 ? -std::numeric_limits<double>::infinity() : std::log1p(-r);
    return std::exp(*log_prod);
  };
  if (law.ln_tail_at_ln) {
    auto acc = std::make_shared<std::shared_ptr<LogProductAccumulator>>();
    auto lt = law.ln_tail_at_ln;
    prod_spec.ln_term = [lt, acc, log_prod, K](double lm) {
      if (!*acc) {
        const double prefix =
            std::isfinite(*log_prod) ? -*log_prod : LogProductAccumulator::kPhiCap;
        *acc = std::make_shared<LogProductAccumulator>(
            prefix, static_cast<double>(K), [lt](double y) {
              const double r = std::exp(lt(y));
              return r >= 1.0 ? LogProductAccumulator::kPhiCap : -std::log1p(-r);
            });
      }
      return -(*acc)->at_ln(lm);
    };
  }
  const Verdict prod_v = classify_series(prod_spec).verdict;
  if (prod_v == Verdict::Finite) return ChainClass::Transient;
  if (mean_v == Verdict::Divergent && prod_v == Verdict::Divergent)
    return ChainClass::NullRecurrent;
  return ChainClass::Inconclusive;
}

struct ChainRun {
  std::uint64_t steps;
  std::uint64_t zero_visits;
  std::uint64_t last_zero_step;  // 0 when never
};

inline ChainRun simulate_chain(const TailLaw& law, std::uint64_t steps, RngStream stream) {
  ChainRun run{steps, 0, 0};
  std::uint64_t y = law.sample(stream);  // Y_0 = psi_0
  for (std::uint64_t m = 1; m <= steps; ++m) {
    const std::uint64_t psi = law.sample(stream);
    y = std::max(psi, y > 0 ? y - 1 : 0);
    if (y == 0) {
      ++run.zero_visits;
      run.last_zero_step = m;
    }
  }
  return run;
}

struct FastCover {
  std::vector<std::int64_t> sites;  // x = x_0 < x_1 < ...
  bool reached_window_end = false;  // cover ran out of window, not component
};

// Greedy argmax cover of the component of x: x_{i+1} is the rightmost
// maximizer of y + psi_y over (x_i, x_i + psi_{x_i}]. Ends with the
// component's right endpoint when the reach stops growing.
inline std::optional<FastCover> fast_cover(const TadbpSample& s, std::int64_t x) {
  const std::int64_t lo = s.field.window_lo;
  const std::int64_t hi = lo + static_cast<std::int64_t>(s.wet.size()) - 1;
  if (x < lo || x > hi) return std::nullopt;
  const std::size_t ix = static_cast<std::size_t>(x - lo);
  const bool is_wet = s.wet[ix] != 0;
  auto psi_at = [&](std::int64_t site) { return s.field.psi[s.field.pad + (site - lo)]; };
  if (!is_wet && psi_at(x) == 0) return std::nullopt;  // isolated

  FastCover cover;
  std::int64_t cur = x;
  cover.sites.push_back(cur);
  while (true) {
    const std::uint64_t psi = psi_at(cur);
    if (psi == 0) break;
    const std::int64_t reach_raw =
        cur + static_cast<std::int64_t>(std::min<std::uint64_t>(psi, 1u << 30));
    if (reach_raw > hi) {
      cover.reached_window_end = true;
      break;
    }
    std::int64_t best = cur + 1;
    std::int64_t best_reach = -1;
    for (std::int64_t y = cur + 1; y <= reach_raw; ++y) {
      const std::int64_t ry =
          y + static_cast<std::int64_t>(std::min<std::uint64_t>(psi_at(y), 1u << 30));
      if (ry >= best_reach) {  // rightmost maximizer
        best_reach = ry;
        best = y;
      }
    }
    if (best_reach > reach_raw) {
      cur = best;
      cover.sites.push_back(cur);
    } else {
      // finite component: terminal site is the reach boundary itself
      cur = reach_raw;
      cover.sites.push_back(cur);
      break;
    }
  }
  return cover;
}

}  // namespace combust
