#include <doctest.h>

#include <cmath>
#include <vector>

#include "combust/classifier.hpp"
#include "combust/dist.hpp"
#include "combust/series.hpp"
#include "combust/series_examples.hpp"

using namespace combust;

namespace {
const double kE = std::exp(1.0);

std::vector<CountDistribution> regression_set() {
  return {
      CountDistribution::delta(1),
      CountDistribution::delta(5),
      CountDistribution::geometric(0.5),
      CountDistribution::poisson(2.0),
      CountDistribution::power_log_tail(1.0, 1.0),
      CountDistribution::power_log_tail(2.0, 1.0),
      CountDistribution::power_log_tail(3.0, 1.0),
      CountDistribution::log_log_tail(1.0),
  };
}
}  // namespace

TEST_CASE("series engine: geometric and harmonic reference series") {
  SeriesSpec geo;
  geo.m_max = 10000;
  geo.term = [](std::uint64_t m) { return std::pow(0.5, static_cast<double>(m)); };
  geo.ln_term = [](double lm) { return std::exp(lm) * std::log(0.5); };
  CHECK(classify_series(geo).verdict == Verdict::Finite);

  SeriesSpec harmonic;
  harmonic.m_max = 10000;
  harmonic.term = [](std::uint64_t m) { return 1.0 / static_cast<double>(m); };
  harmonic.ln_term = [](double lm) { return -lm; };
  CHECK(classify_series(harmonic).verdict == Verdict::Divergent);

  // the slowly-varying pair the probe's second level exists for
  SeriesSpec ln1;  // sum 1/(m ln m): divergent
  ln1.m_max = 100000;
  ln1.term = [](std::uint64_t m) {
    return m >= 2 ? 1.0 / (static_cast<double>(m) * std::log(static_cast<double>(m))) : 0.0;
  };
  ln1.ln_term = [](double lm) { return -lm - std::log(lm); };
  const auto t1 = classify_series(ln1);
  CHECK(t1.verdict == Verdict::Divergent);
  CHECK(t1.probe_level == 2);

  SeriesSpec ln2;  // sum 1/(m ln^2 m): convergent
  ln2.m_max = 100000;
  ln2.term = [](std::uint64_t m) {
    const double l = std::log(static_cast<double>(m));
    return m >= 2 ? 1.0 / (static_cast<double>(m) * l * l) : 0.0;
  };
  ln2.ln_term = [](double lm) { return -lm - 2.0 * std::log(lm); };
  CHECK(classify_series(ln2).verdict == Verdict::Finite);

  // p = 1.5: convergent, settled at the second level
  SeriesSpec p15;
  p15.m_max = 100000;
  p15.term = [](std::uint64_t m) {
    const double l = std::log(static_cast<double>(std::max<std::uint64_t>(m, 2)));
    return 1.0 / (static_cast<double>(m) * std::pow(l, 1.5));
  };
  p15.ln_term = [](double lm) { return -lm - 1.5 * std::log(lm); };
  CHECK(classify_series(p15).verdict == Verdict::Finite);
}

TEST_CASE("series_i examples") {
  // bounded support: all terms vanish past log_B 5
  for (double b : default_b_grid()) {
    const auto tr = series_i(CountDistribution::delta(5), 1, b, 1000);
    CHECK(tr.verdict == Verdict::Finite);
    CHECK(tr.checkpoints.back().partial_sum <= std::log(5.0) / std::log(b) + 1.0);
  }
  // terms ~ (m ln 2)^{-3}: finite in d = 1
  CHECK(series_i(CountDistribution::power_log_tail(3.0, 1.0), 1, 2.0).verdict ==
        Verdict::Finite);
  // the worked d-dependence example: a = 2 gives harmonic terms at d = 2
  CHECK(series_i(CountDistribution::power_log_tail(2.0, 1.0), 2, 2.0).verdict ==
        Verdict::Divergent);
  CHECK(series_i(CountDistribution::power_log_tail(2.0, 1.0), 1, 2.0).verdict ==
        Verdict::Finite);
  // a = 3 at d = 2 has exponent 3/2 and genuinely converges
  CHECK(series_i(CountDistribution::power_log_tail(3.0, 1.0), 2, 2.0).verdict ==
        Verdict::Finite);
}

TEST_CASE("series_ii examples") {
  // mu([0, B^n]) = 1 for every n once B is above the support: linear growth
  for (double b : default_b_grid())
    CHECK(series_ii(CountDistribution::delta(1), b).verdict == Verdict::Divergent);
  // Delta(5): for B <= 5 an early factor mu([0,B]) = 0 kills every product
  CHECK(series_ii(CountDistribution::delta(5), 2.0).verdict == Verdict::Finite);
  CHECK(series_ii(CountDistribution::delta(5), 10.0).verdict == Verdict::Divergent);

  // log-log tail: products decay super-polynomially; bounded, Cauchy sums
  const auto ll = series_ii(CountDistribution::log_log_tail(1.0), 2.0);
  CHECK(ll.verdict == Verdict::Finite);
  const auto& cps = ll.checkpoints;
  CHECK(cps.back().partial_sum - cps[cps.size() - 2].partial_sum < 1e-9);

  // power-log a=1: the exponent is c/ln B, so the verdict flips with B
  CHECK(series_ii(CountDistribution::power_log_tail(1.0, 1.0), kE * kE).verdict ==
        Verdict::Divergent);
  CHECK(series_ii(CountDistribution::power_log_tail(1.0, 1.0), std::sqrt(kE)).verdict ==
        Verdict::Finite);
}

TEST_CASE("series_iii examples") {
  for (double b : default_b_grid())
    CHECK(series_iii(CountDistribution::delta(5), b).verdict == Verdict::Finite);
  // terms ~ 1/ln n
  CHECK(series_iii(CountDistribution::log_log_tail(1.0), 2.0).verdict == Verdict::Divergent);
  // terms ~ 1/(n ln^2 n): the truncated Cauchy increment alone would
  // misread this; the analytic probe settles it
  const auto tr = series_iii(CountDistribution::power_log_tail(1.0, 1.0), 2.0);
  CHECK(tr.verdict == Verdict::Finite);
  CHECK(tr.overflow_guard);  // B^{n ln^2 n} left the integer range
}

TEST_CASE("classify: composite verdicts") {
  CHECK(classify(CountDistribution::delta(1), 1).verdict == SpreadVerdict::Linear);
  CHECK(classify(CountDistribution::geometric(0.5), 1).verdict == SpreadVerdict::Linear);
  CHECK(classify(CountDistribution::geometric(0.5), 2).verdict == SpreadVerdict::Linear);
  CHECK(classify(CountDistribution::poisson(2.0), 1).verdict == SpreadVerdict::Linear);

  const auto ll = classify(CountDistribution::log_log_tail(1.0), 1);
  CHECK(ll.verdict == SpreadVerdict::Superlinear);
  CHECK(ll.via_ii);
  CHECK(ll.via_iii);

  // the open gap: (i) divergent, (ii) base-dependent, (iii) finite
  const auto gap = classify(CountDistribution::power_log_tail(1.0, 1.0), 1);
  CHECK(gap.verdict == SpreadVerdict::Unknown);
  CHECK(!gap.via_ii);
  CHECK(!gap.via_iii);
  CHECK(!gap.conflict);
  CHECK(gap.log_moment_check.has_value());
  CHECK(gap.log_moment_check->verdict == Verdict::Divergent);
}

TEST_CASE("classify rejects a grid that does not span (1, 10]") {
  CHECK_THROWS_AS(classify(CountDistribution::delta(1), 1, {1.5, 2.0, 4.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(classify(CountDistribution::delta(1), 1, {2.0, 10.0}),
                  std::invalid_argument);
}

TEST_CASE("B-robustness of (i) and (iii); (ii) may flip across the grid") {
  for (const auto& mu : regression_set()) {
    Verdict vi = Verdict::Inconclusive, viii = Verdict::Inconclusive;
    bool first = true;
    for (double b : default_b_grid()) {
      const Verdict i = series_i(mu, 1, b).verdict;
      const Verdict iii = series_iii(mu, b).verdict;
      if (first) {
        vi = i;
        viii = iii;
        first = false;
      } else {
        CHECK(i == vi);
        CHECK(iii == viii);
      }
    }
  }
  // the a=1 power-log family exhibits both verdicts for (ii) on the grid
  bool saw_finite = false, saw_divergent = false;
  for (double b : default_b_grid()) {
    const Verdict v = series_ii(CountDistribution::power_log_tail(1.0, 1.0), b).verdict;
    saw_finite = saw_finite || v == Verdict::Finite;
    saw_divergent = saw_divergent || v == Verdict::Divergent;
  }
  CHECK(saw_finite);
  CHECK(saw_divergent);
}

TEST_CASE("exclusivity: no law triggers both linear and superlinear evidence") {
  for (const auto& mu : regression_set()) {
    const auto rep = classify(mu, 1);
    bool linear_trigger = false;
    for (const auto& t : rep.criterion_i) linear_trigger |= t.verdict == Verdict::Finite;
    if (rep.log_moment_check && rep.log_moment_check->verdict == Verdict::Finite)
      linear_trigger = true;
    const bool superlinear_trigger = rep.via_ii || rep.via_iii;
    CHECK(!(linear_trigger && superlinear_trigger));
    CHECK(!rep.conflict);
  }
}

TEST_CASE("log-moment double-sum equivalence at matched truncations") {
  for (const auto& mu : {CountDistribution::geometric(0.5),
                         CountDistribution::power_log_tail(1.0, 1.0),
                         CountDistribution::power_log_tail(3.0, 1.0)}) {
    const Verdict lm = mu.log_moment(100000).verdict;
    for (double a : {2.0, 4.0}) {
      const Verdict ds = log_moment_double_sum(mu, a, 100000).verdict;
      CHECK(ds == lm);
    }
  }
}

TEST_CASE("pgf-product series matches criterion (ii) across the grid") {
  for (const auto& mu :
       {CountDistribution::geometric(0.5), CountDistribution::power_log_tail(1.0, 1.0),
        CountDistribution::log_log_tail(1.0)}) {
    for (double a : {std::sqrt(kE), 2.0, kE * kE}) {
      const Verdict lhs = product_pgf_series(mu, a, 20000).verdict;
      const Verdict rhs = series_ii(mu, a, 20000).verdict;
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("independence constructions realize all four verdict quadrants") {
  const auto fams = independent_series_examples();
  REQUIRE(fams.size() == 4);
  bool seen[2][2] = {{false, false}, {false, false}};
  for (const auto& fam : fams) {
    if (fam.structural()) continue;
    std::vector<double> sums_ii, sums_iii;
    for (std::uint64_t trunc : {std::uint64_t(1000), std::uint64_t(10000), std::uint64_t(100000)}) {
      const auto ti = fam.eval_ii(trunc);
      const auto tiii = fam.eval_iii(trunc);
      CHECK(ti.verdict == fam.expected_ii());
      CHECK(tiii.verdict == fam.expected_iii());
      sums_ii.push_back(ti.checkpoints.back().partial_sum);
      sums_iii.push_back(tiii.checkpoints.back().partial_sum);
    }
    // monotone trends in the truncation
    for (int i = 0; i + 1 < 3; ++i) {
      CHECK(sums_ii[i] <= sums_ii[i + 1] * (1.0 + 1e-12));
      CHECK(sums_iii[i] <= sums_iii[i + 1] * (1.0 + 1e-12));
    }
    // a divergent verdict must come with visibly growing partial sums
    if (fam.expected_iii() == Verdict::Divergent) CHECK(sums_iii[2] > sums_iii[0] * 1.5);
    seen[fam.expected_ii() == Verdict::Finite ? 0 : 1]
        [fam.expected_iii() == Verdict::Finite ? 0 : 1] = true;
  }
  // the recursive family certifies the fourth quadrant structurally
  const auto blocks = SparseBlockConstruction::blocks(6);
  REQUIRE(blocks.size() >= 2);
  double prev_sum_vg = 0.0;
  for (const auto& b : blocks) {
    CHECK(b.block_gamma_sum >= 1.0 - 1e-9);   // sum of gamma over each block
    CHECK(b.product_term_log >= -1e-9);       // product-series term >= 1 at M_n
    CHECK(b.sum_vg > prev_sum_vg);
    prev_sum_vg = b.sum_vg;
  }
  seen[1][1] = true;
  CHECK(seen[0][0]);
  CHECK(seen[0][1]);
  CHECK(seen[1][0]);
  CHECK(seen[1][1]);

  // and the raw truncated sums of the recursive family do plateau, which is
  // exactly why the structural certificate exists
  const auto& tw = fams.back();
  REQUIRE(tw.structural());
  const double s4 = tw.eval_iii(10000).checkpoints.back().partial_sum;
  const double s5 = tw.eval_iii(100000).checkpoints.back().partial_sum;
  CHECK(s5 - s4 < 0.05);
  CHECK(s5 > 1.0);  // the first blocks did contribute
}
