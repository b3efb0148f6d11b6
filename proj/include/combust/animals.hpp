#pragma once

// Greedy lattice animals over a sampled speed-record weight field: exact
// branch-and-bound enumeration of connected origin-containing site sets
// (small sizes), a beam-search lower bound for larger ones, and the
// normalized-score table used as the finite-size surrogate of the
// animal-average criterion.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "combust/dist.hpp"
#include "combust/rng.hpp"
#include "combust/walks.hpp"

namespace combust {

struct AnimalWeights {
  int dim = 2;
  std::int64_t radius = 12;  // L-inf box radius around the origin
  double a_threshold = 2.0;
  std::vector<double> w;  // (2R+1)^dim values, row-major
  std::string provenance;
  std::uint64_t eta_clamp = 100000;
  std::uint64_t clamped_sites = 0;

  std::size_t side() const { return static_cast<std::size_t>(2 * radius + 1); }
  std::size_t cell_count() const {
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= side();
    return n;
  }
  // index from coordinates in [-R, R]^dim
  std::size_t index(const std::vector<std::int64_t>& x) const {
    std::size_t idx = 0;
    for (int i = 0; i < dim; ++i)
      idx = idx * side() + static_cast<std::size_t>(x[i] + radius);
    return idx;
  }
  double at(std::size_t idx) const { return w[idx]; }
};

// Independent per-site weights W_A^{(x)} = max over eta(x) walks of the
// jump-count speed record. eta is clamped (heavy-tail laws put mass beyond
// any simulatable count); clamps are counted in the output.
inline AnimalWeights sample_weights(const CountDistribution& mu, double a, int dim,
                                    std::int64_t radius, double tol, std::uint64_t seed,
                                    std::uint64_t eta_clamp = 100000) {
  if (!(a > 1.0)) throw std::invalid_argument("sample_weights: A > 1");
  if (dim < 1 || dim > 3) throw std::invalid_argument("sample_weights: dim in [1,3]");
  AnimalWeights f;
  f.dim = dim;
  f.radius = radius;
  f.a_threshold = a;
  f.eta_clamp = eta_clamp;
  f.w.assign(f.cell_count(), 0.0);
  const double tol_site = tol / static_cast<double>(f.cell_count());
  for (std::size_t idx = 0; idx < f.w.size(); ++idx) {
    RngStream eta_stream = derive_stream(seed, stream_tag::eta, static_cast<std::int64_t>(idx));
    std::uint64_t eta = mu.sample(eta_stream);
    if (eta > eta_clamp) {
      eta = eta_clamp;
      ++f.clamped_sites;
    }
    RngStream walk_stream =
        derive_stream(seed, stream_tag::walk, static_cast<std::int64_t>(idx));
    f.w[idx] = static_cast<double>(w_A_sample(eta, a, tol_site, walk_stream).value);
  }
  f.provenance = "mu=" + std::string(to_string(mu.kind())) + ", A=" + std::to_string(a);
  return f;
}

struct AnimalScore {
  double score = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> witness;  // cell indices
  bool found() const { return std::isfinite(score); }
};

struct SizeCapExceeded : std::runtime_error {
  SizeCapExceeded() : std::runtime_error("animal size beyond the exact enumeration cap") {}
};

namespace animals_detail {

inline std::vector<std::size_t> cell_neighbors(const AnimalWeights& f, std::size_t idx) {
  std::vector<std::size_t> out;
  const std::size_t side = f.side();
  std::size_t rest = idx;
  std::vector<std::size_t> digits(f.dim);
  for (int i = f.dim - 1; i >= 0; --i) {
    digits[i] = rest % side;
    rest /= side;
  }
  for (int i = 0; i < f.dim; ++i) {
    std::size_t stride = 1;
    for (int j = f.dim - 1; j > i; --j) stride *= side;
    if (digits[i] > 0) out.push_back(idx - stride);
    if (digits[i] + 1 < side) out.push_back(idx + stride);
  }
  return out;
}

// Exact enumerator: each connected superset of {origin} inside the box is
// visited exactly once (pop-and-forbid discipline on the untried list).
class ExactEnumerator {
 public:
  ExactEnumerator(const AnimalWeights& f, std::vector<std::size_t> target_sizes)
      : f_(f), targets_(std::move(target_sizes)) {
    std::sort(targets_.begin(), targets_.end());
    max_size_ = targets_.back();
    best_.assign(max_size_ + 1, AnimalScore{});
    // prefix sums of sorted weights: admissible completion bound
    std::vector<double> sorted(f.w);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    top_prefix_.assign(max_size_ + 1, 0.0);
    for (std::size_t k = 1; k <= max_size_ && k <= sorted.size(); ++k)
      top_prefix_[k] = top_prefix_[k - 1] + std::max(0.0, sorted[k - 1]);
    seen_.assign(f.cell_count(), 0);
    untried_by_depth_.resize(max_size_ + 2);
  }

  void seed_best(std::size_t size, double score) {
    if (size < best_.size() && score > best_[size].score) {
      best_[size].score = score;
      best_[size].witness.clear();  // score-only seed (from the beam pass)
    }
  }

  std::vector<AnimalScore> run() {
    std::vector<std::int64_t> origin(f_.dim, 0);
    const std::size_t o = f_.index(origin);
    seen_[o] = 1;
    chosen_.clear();
    score_ = 0.0;
    std::vector<std::size_t>& untried = untried_by_depth_[0];
    untried.clear();
    untried.push_back(o);
    grow(0);
    std::vector<AnimalScore> out;
    for (std::size_t s : targets_) out.push_back(best_[s]);
    return out;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  void record() {
    const std::size_t s = chosen_.size();
    auto it = std::lower_bound(targets_.begin(), targets_.end(), s);
    if (it != targets_.end() && *it == s && score_ > best_[s].score) {
      best_[s].score = score_;
      best_[s].witness = chosen_;
    }
  }

  bool prunable() const {
    const std::size_t s = chosen_.size();
    for (std::size_t tgt : targets_) {
      if (tgt < s) continue;
      if (score_ + top_prefix_[tgt - s] > best_[tgt].score + 1e-12) return false;
    }
    return true;
  }

  void grow(std::size_t depth) {
    std::vector<std::size_t>& untried = untried_by_depth_[depth];
    // iterate by index; items before i are forbidden within this subtree
    for (std::size_t i = 0; i < untried.size(); ++i) {
      const std::size_t u = untried[i];
      chosen_.push_back(u);
      score_ += f_.w[u];
      ++nodes_;
      record();
      if (chosen_.size() < max_size_ && !prunable()) {
        auto& next = untried_by_depth_[depth + 1];
        next.assign(untried.begin() + i + 1, untried.end());
        std::size_t marked_from = next.size();
        for (std::size_t nb : cell_neighbors(f_, u)) {
          if (!seen_[nb]) {
            seen_[nb] = 1;
            next.push_back(nb);
          }
        }
        grow(depth + 1);
        for (std::size_t j = marked_from; j < untried_by_depth_[depth + 1].size(); ++j)
          seen_[untried_by_depth_[depth + 1][j]] = 0;
      }
      score_ -= f_.w[u];
      chosen_.pop_back();
    }
  }

  const AnimalWeights& f_;
  std::vector<std::size_t> targets_;
  std::size_t max_size_ = 1;
  std::vector<AnimalScore> best_;
  std::vector<double> top_prefix_;
  std::vector<std::uint8_t> seen_;
  std::vector<std::size_t> chosen_;
  std::vector<std::vector<std::size_t>> untried_by_depth_;
  double score_ = 0.0;
  std::uint64_t nodes_ = 0;
};

}  // namespace animals_detail

inline constexpr std::size_t kExactAnimalCap = 12;  // n; animals of n+1 sites

// Exact maximum of sum-of-weights over connected (n+1)-site sets containing
// the origin.
inline AnimalScore max_animal_exact(const AnimalWeights& f, std::size_t n) {
  if (n > kExactAnimalCap && f.dim >= 2) throw SizeCapExceeded();
  if (static_cast<std::int64_t>(n) > 2 * f.radius * f.dim)
    throw std::invalid_argument("max_animal_exact: box too small for the animal size");
  animals_detail::ExactEnumerator e(f, {n + 1});
  return e.run().front();
}

// One exact pass reporting the best animal of every requested size.
inline std::vector<AnimalScore> max_animal_exact_sizes(const AnimalWeights& f,
                                                       const std::vector<std::size_t>& ns,
                                                       const std::vector<double>* seeds = nullptr) {
  std::vector<std::size_t> sizes;
  for (std::size_t n : ns) {
    if (n > kExactAnimalCap && f.dim >= 2) throw SizeCapExceeded();
    sizes.push_back(n + 1);
  }
  animals_detail::ExactEnumerator e(f, sizes);
  if (seeds)
    for (std::size_t i = 0; i < sizes.size() && i < seeds->size(); ++i)
      e.seed_best(sizes[i], (*seeds)[i]);
  return e.run();
}

// Beam-search lower bound; beam = SIZE_MAX keeps every state and matches the
// exact enumerator.
inline double max_animal_greedy(const AnimalWeights& f, std::size_t n, std::size_t beam) {
  if (beam < 1) throw std::invalid_argument("max_animal_greedy: beam >= 1");
  struct State {
    std::vector<std::size_t> cells;  // sorted
    double score;
  };
  std::vector<std::int64_t> origin_coord(f.dim, 0);
  const std::size_t o = f.index(origin_coord);
  std::vector<State> layer{{{o}, f.w[o]}};
  for (std::size_t step = 0; step < n; ++step) {
    std::unordered_set<std::uint64_t> seen_keys;
    std::vector<State> next;
    for (const auto& st : layer) {
      for (std::size_t cell : st.cells) {
        for (std::size_t nb : animals_detail::cell_neighbors(f, cell)) {
          if (std::binary_search(st.cells.begin(), st.cells.end(), nb)) continue;
          std::vector<std::size_t> cells(st.cells);
          cells.insert(std::upper_bound(cells.begin(), cells.end(), nb), nb);
          std::uint64_t key = 0xcbf29ce484222325ULL;
          for (std::size_t c : cells) key = detail::mix64(key ^ c);
          if (!seen_keys.insert(key).second) continue;
          next.push_back({std::move(cells), st.score + f.w[nb]});
        }
      }
    }
    if (next.empty()) break;
    if (next.size() > beam) {
      std::partial_sort(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(beam),
                        next.end(),
                        [](const State& a, const State& b) { return a.score > b.score; });
      next.resize(beam);
    }
    layer = std::move(next);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& st : layer) best = std::max(best, st.score);
  return best;
}

struct ScoreRow {
  double a;
  std::size_t n;
  std::uint64_t trial;
  double score;
  double normalized;  // score / (n+1)
};

struct ScoreTable {
  std::vector<ScoreRow> rows;
  // mean normalized score per (a, n)
  double mean(double a, std::size_t n) const {
    double acc = 0.0;
    std::uint64_t cnt = 0;
    for (const auto& r : rows)
      if (r.a == a && r.n == n) {
        acc += r.normalized;
        ++cnt;
      }
    return cnt ? acc / static_cast<double>(cnt) : std::numeric_limits<double>::quiet_NaN();
  }
};

// Per (A, n): normalized max-animal scores over independent weight fields.
inline ScoreTable normalized_score_table(const CountDistribution& mu, int dim,
                                 const std::vector<double>& a_grid,
                                 const std::vector<std::size_t>& n_grid, std::uint64_t trials,
                                 double tol, std::uint64_t seed,
                                 std::int64_t radius = -1) {
  if (a_grid.empty() || n_grid.empty()) throw std::invalid_argument("normalized_score_table: empty grid");
  std::size_t n_max = 0;
  for (std::size_t n : n_grid) n_max = std::max(n_max, n);
  if (radius < 0) radius = static_cast<std::int64_t>(n_max);
  ScoreTable table;
  for (std::size_t ai = 0; ai < a_grid.size(); ++ai) {
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
      const std::uint64_t field_seed =
          derive_stream(seed, stream_tag::field, static_cast<std::int64_t>(ai),
                        static_cast<std::int64_t>(trial))
              .state();
      const AnimalWeights f =
          sample_weights(mu, a_grid[ai], dim, radius, tol, field_seed);
      // beam pass seeds the exact enumerator's bounds
      std::vector<double> seeds;
      for (std::size_t n : n_grid) seeds.push_back(max_animal_greedy(f, n, 64));
      const auto bests = max_animal_exact_sizes(f, n_grid, &seeds);
      for (std::size_t i = 0; i < n_grid.size(); ++i) {
        const double sc = bests[i].found() ? bests[i].score : seeds[i];
        table.rows.push_back({a_grid[ai], n_grid[i], trial, sc,
                              sc / static_cast<double>(n_grid[i] + 1)});
      }
    }
  }
  return table;
}

}  // namespace combust
