#pragma once

// Spread-rate classification: evaluates the three series criteria over a
// grid of bases B and combines them under their quantifier structure
// (i: some B; ii: every B; iii: some B) into a verdict with evidence.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "combust/dist.hpp"
#include "combust/series.hpp"

namespace combust {

namespace classifier_detail {

// mu([x, inf)) at ln x, switching to the smooth log-argument form once x
// leaves the integer range; flags the switch.
inline double tail_at_ln_arg(const CountDistribution& d, double ln_arg,
                             const std::shared_ptr<bool>& overflow) {
  if (ln_arg < 42.0) return d.tail_at_real(std::exp(ln_arg));
  if (overflow) *overflow = true;
  return std::exp(d.ln_tail_at_ln(ln_arg));
}

// mu((x, inf)) at ln x (complement of the box [0, x]).
inline double beyond_box_at_ln_arg(const CountDistribution& d, double ln_arg,
                                   const std::shared_ptr<bool>& overflow) {
  if (ln_arg < 42.0) {
    const double x = std::exp(ln_arg);
    return d.tail(static_cast<std::uint64_t>(std::floor(x)) + 1);
  }
  if (overflow) *overflow = true;
  return std::exp(d.ln_tail_at_ln(ln_arg));
}

}  // namespace classifier_detail

// sum_m [mu([B^m, inf))]^{1/dim}
inline SeriesTrace series_i(const CountDistribution& d, int dim, double b,
                            std::uint64_t m_max = 100000) {
  if (!(b > 1.0)) throw std::invalid_argument("series_i: B > 1");
  if (dim < 1) throw std::invalid_argument("series_i: dim >= 1");
  if (m_max < 3) throw std::invalid_argument("series_i: m_max >= 3");
  const double lnb = std::log(b);
  const double inv_d = 1.0 / dim;
  SeriesSpec spec;
  spec.m_max = m_max;
  spec.overflow_flag = std::make_shared<bool>(false);
  auto ovf = spec.overflow_flag;
  spec.term = [&d, lnb, inv_d, ovf](std::uint64_t m) {
    const double t = classifier_detail::tail_at_ln_arg(d, static_cast<double>(m) * lnb, ovf);
    return std::pow(t, inv_d);
  };
  if (d.has_analytic_tail()) {
    spec.ln_term = [&d, lnb, inv_d](double lm) {
      return inv_d * d.ln_tail_at_ln(std::exp(lm) * lnb);
    };
  }
  SeriesTrace tr = classify_series(spec);
  tr.base = b;
  return tr;
}

// sum_m prod_{n<=m} mu([0, B^n]), accumulated in log space
inline SeriesTrace series_ii(const CountDistribution& d, double b,
                             std::uint64_t m_max = 100000) {
  if (!(b > 1.0)) throw std::invalid_argument("series_ii: B > 1");
  const double lnb = std::log(b);
  SeriesSpec spec;
  spec.m_max = m_max;
  spec.overflow_flag = std::make_shared<bool>(false);
  auto ovf = spec.overflow_flag;
  auto log_prod = std::make_shared<double>(0.0);  // ln prod_{n<=m} factors
  spec.term = [&d, lnb, ovf, log_prod](std::uint64_t m) {
    const double t = classifier_detail::beyond_box_at_ln_arg(d, static_cast<double>(m) * lnb, ovf);
    *log_prod += t >= 1.0 ? -std::numeric_limits<double>::infinity() : std::log1p(-t);
    return std::exp(*log_prod);
  };
  if (d.has_analytic_tail()) {
    auto acc = std::make_shared<std::shared_ptr<LogProductAccumulator>>();
    spec.ln_term = [&d, lnb, acc, log_prod, m_max](double lm) {
      if (!*acc) {
        const double prefix = std::isfinite(*log_prod) ? -*log_prod
                                                       : LogProductAccumulator::kPhiCap;
        *acc = std::make_shared<LogProductAccumulator>(
            prefix, static_cast<double>(m_max), [&d, lnb](double y) {
              const double t = std::exp(d.ln_tail_at_ln(std::exp(y) * lnb));
              return t >= 1.0 ? LogProductAccumulator::kPhiCap : -std::log1p(-t);
            });
      }
      return -(*acc)->at_ln(lm);
    };
  }
  SeriesTrace tr = classify_series(spec);
  tr.base = b;
  return tr;
}

// sum_n mu([B^{n ln^2 n}, inf)); the exponent lives in log space throughout
inline SeriesTrace series_iii(const CountDistribution& d, double b,
                              std::uint64_t n_max = 10000) {
  if (!(b > 1.0)) throw std::invalid_argument("series_iii: B > 1");
  if (n_max < 3) throw std::invalid_argument("series_iii: n_max >= 3");
  const double lnb = std::log(b);
  SeriesSpec spec;
  spec.m_max = n_max;
  spec.overflow_flag = std::make_shared<bool>(false);
  auto ovf = spec.overflow_flag;
  auto exponent = [lnb](double n, double ln_n) { return n * ln_n * ln_n * lnb; };
  spec.term = [&d, ovf, exponent](std::uint64_t n) {
    const double nn = static_cast<double>(n);
    const double ln_arg = exponent(nn, std::log(nn));
    return classifier_detail::tail_at_ln_arg(d, ln_arg, ovf);
  };
  if (d.has_analytic_tail()) {
    spec.ln_term = [&d, exponent](double lm) {
      return d.ln_tail_at_ln(exponent(std::exp(lm), lm));
    };
  }
  SeriesTrace tr = classify_series(spec);
  tr.base = b;
  return tr;
}

enum class SpreadVerdict { Linear, Superlinear, Unknown };

inline const char* to_string(SpreadVerdict v) {
  switch (v) {
    case SpreadVerdict::Linear: return "Linear";
    case SpreadVerdict::Superlinear: return "Superlinear";
    default: return "Unknown";
  }
}

struct ClassifyBudgets {
  std::uint64_t m_max_i = 100000;
  std::uint64_t m_max_ii = 100000;
  std::uint64_t n_max_iii = 10000;  // the doubly-exponential argument needs fewer terms
};

inline std::vector<double> default_b_grid() { return {1.2, 2.0, std::exp(1.0), 4.0, 10.0}; }

struct ClassificationReport {
  int dimension = 1;
  std::vector<double> b_grid;
  std::vector<SeriesTrace> criterion_i, criterion_ii, criterion_iii;
  std::optional<CountDistribution::LogMomentResult> log_moment_check;  // d = 1 only
  SpreadVerdict verdict = SpreadVerdict::Unknown;
  bool via_ii = false, via_iii = false;
  bool conflict = false;
  bool b_robust_i = true, b_robust_iii = true;
  std::string notes;
};

inline ClassificationReport classify(const CountDistribution& d, int dim,
                                     const std::vector<double>& grid = default_b_grid(),
                                     ClassifyBudgets budgets = {}) {
  if (grid.size() < 3) throw std::invalid_argument("classify: need >= 3 bases");
  double gmax = 0.0;
  for (double b : grid) {
    if (!(b > 1.0)) throw std::invalid_argument("classify: bases must exceed 1");
    gmax = std::max(gmax, b);
  }
  if (gmax < 10.0) throw std::invalid_argument("classify: grid must span (1, 10]");

  ClassificationReport rep;
  rep.dimension = dim;
  rep.b_grid = grid;
  for (double b : grid) {
    rep.criterion_i.push_back(series_i(d, dim, b, budgets.m_max_i));
    rep.criterion_ii.push_back(series_ii(d, b, budgets.m_max_ii));
    rep.criterion_iii.push_back(series_iii(d, b, budgets.n_max_iii));
  }

  auto all_equal = [](const std::vector<SeriesTrace>& v) {
    for (const auto& t : v)
      if (t.verdict != v.front().verdict) return false;
    return true;
  };
  rep.b_robust_i = all_equal(rep.criterion_i);
  rep.b_robust_iii = all_equal(rep.criterion_iii);

  bool linear = false;
  for (const auto& t : rep.criterion_i) linear = linear || t.verdict == Verdict::Finite;

  if (dim == 1) {
    rep.log_moment_check = d.log_moment(budgets.m_max_i);
    const Verdict lm = rep.log_moment_check->verdict;
    // For d = 1 the log-moment criterion is equivalent to (i); a decided
    // disagreement signals numeric misclassification.
    Verdict i_consensus = Verdict::Inconclusive;
    if (rep.b_robust_i) i_consensus = rep.criterion_i.front().verdict;
    if (lm != Verdict::Inconclusive && i_consensus != Verdict::Inconclusive &&
        lm != i_consensus) {
      rep.conflict = true;
      rep.notes += "log-moment and criterion-(i) disagree; ";
    }
    if (lm == Verdict::Finite) linear = true;
  }

  bool ii_all_finite = !rep.criterion_ii.empty();
  for (const auto& t : rep.criterion_ii) ii_all_finite = ii_all_finite && t.verdict == Verdict::Finite;
  rep.via_ii = ii_all_finite;
  for (const auto& t : rep.criterion_iii) rep.via_iii = rep.via_iii || t.verdict == Verdict::Divergent;

  const bool superlinear = rep.via_ii || rep.via_iii;
  if (linear && superlinear) {
    rep.conflict = true;
    rep.verdict = SpreadVerdict::Unknown;
    rep.notes += "exclusive criteria both triggered; ";
  } else if (rep.conflict) {
    rep.verdict = SpreadVerdict::Unknown;
  } else if (linear) {
    rep.verdict = SpreadVerdict::Linear;
  } else if (superlinear) {
    rep.verdict = SpreadVerdict::Superlinear;
  } else {
    rep.verdict = SpreadVerdict::Unknown;
  }
  if (rep.via_ii)
    rep.notes += "criterion (ii) quantifier 'every B' approximated by the grid plus analytic-tail extrapolation; ";
  return rep;
}

// Truncated double sum sum_k mu(k) sum_n (1 ^ k A^{-n}); same convergence
// class as the log moment. The inner sum has the closed form
// floor(log_A k) + k A^{-(floor+1)} / (1 - 1/A).
inline SeriesTrace log_moment_double_sum(const CountDistribution& d, double a_base,
                                         std::uint64_t k_max = 100000) {
  if (!(a_base > 1.0)) throw std::invalid_argument("log_moment_double_sum: A > 1");
  const double lna = std::log(a_base);
  SeriesSpec spec;
  spec.m_max = k_max;
  auto inner = [a_base, lna](double k) {
    if (k < 1.0) return 0.0;
    const double f = std::floor(std::log(k) / lna);
    return f + std::exp(std::log(k) - (f + 1.0) * lna) / (1.0 - 1.0 / a_base);
  };
  spec.term = [&d, inner](std::uint64_t k) { return d.pmf(k) * inner(static_cast<double>(k)); };
  if (d.has_analytic_tail()) {
    spec.ln_term = [&d, lna](double lk) {
      // inner(k) ~ ln k / ln A far out
      return d.ln_pmf_smooth_ln(lk) + std::log(lk) - std::log(lna);
    };
  }
  return classify_series(spec);
}

// Truncated sum_m prod_{n<=m} pgf(1 - A^{-n}); same convergence class as
// series (ii) across every base.
inline SeriesTrace product_pgf_series(const CountDistribution& d, double a_base,
                                      std::uint64_t m_max = 100000) {
  if (!(a_base > 1.0)) throw std::invalid_argument("product_pgf_series: A > 1");
  const double lna = std::log(a_base);
  SeriesSpec spec;
  spec.m_max = m_max;
  auto log_prod = std::make_shared<double>(0.0);
  spec.term = [&d, lna, log_prod](std::uint64_t n) {
    const double nn = static_cast<double>(n);
    double omp;  // 1 - pgf(1 - A^{-n})
    if (nn * lna < 700.0) {
      const double delta = std::exp(-nn * lna);
      omp = delta < 1e-14 ? d.one_minus_pgf_from_ln_delta(-nn * lna)
                          : d.one_minus_pgf(1.0 - delta);
    } else {
      omp = d.one_minus_pgf_from_ln_delta(-nn * lna);
    }
    *log_prod += omp >= 1.0 ? -std::numeric_limits<double>::infinity() : std::log1p(-omp);
    return std::exp(*log_prod);
  };
  if (d.has_analytic_tail()) {
    auto acc = std::make_shared<std::shared_ptr<LogProductAccumulator>>();
    spec.ln_term = [&d, lna, acc, log_prod, m_max](double lm) {
      if (!*acc) {
        const double prefix = std::isfinite(*log_prod) ? -*log_prod
                                                       : LogProductAccumulator::kPhiCap;
        *acc = std::make_shared<LogProductAccumulator>(
            prefix, static_cast<double>(m_max), [&d, lna](double y) {
              const double omp = d.one_minus_pgf_from_ln_delta(-std::exp(y) * lna);
              return omp >= 1.0 ? LogProductAccumulator::kPhiCap : -std::log1p(-omp);
            });
      }
      return -(*acc)->at_ln(lm);
    };
  }
  SeriesTrace tr = classify_series(spec);
  tr.base = a_base;
  return tr;
}

}  // namespace combust
