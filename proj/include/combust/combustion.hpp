#pragma once

// Event-driven simulation of the stochastic combustion growth process on
// Z^d. Active particles carry their own exponential clocks; sleeping counts
// are sampled lazily and deterministically from (seed, site), and every
// particle's path is a function of its identity and elapsed time since
// activation. That keying is what makes the coupling tests possible: the
// union-over-sources identity and the trimmed-process dominance both compare
// runs that share the same environment and the same per-particle paths.
//
// Sites with very large sleeping counts are represented in bulk: the first
// jump times of k rate-1 clocks are generated as order statistics
// (cumulative Exp(k), Exp(k-1), ... spacings), materializing one particle
// per event. Exact in distribution and O(1) memory per site.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "combust/dist.hpp"
#include "combust/rng.hpp"
#include "combust/stats.hpp"

namespace combust {

inline constexpr int kMaxDim = 4;

struct Coord {
  std::array<std::int64_t, kMaxDim> c{0, 0, 0, 0};
  bool operator==(const Coord& o) const { return c == o.c; }
};

struct CoordHash {
  std::size_t operator()(const Coord& x) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::int64_t v : x.c) h = detail::mix64(h ^ static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
  }
};

enum class SimMode { Full, Trimmed };
enum class Termination { Completed, EventCapHit, SiteCapHit };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Completed: return "Completed";
    case Termination::EventCapHit: return "EventCapHit";
    default: return "SiteCapHit";
  }
}

struct SimulationConfig {
  int dim = 1;
  CountDistribution mu = CountDistribution::delta(1);
  double horizon = 1000.0;
  std::uint64_t event_cap = 10000000;
  std::uint64_t site_cap = 1000000;
  std::uint64_t seed = 1;
  SimMode mode = SimMode::Full;
  double record_cadence = 1.0;
  std::vector<Coord> sources;  // empty means the origin
  std::uint64_t bulk_threshold = 64;
  bool dump_sites = false;  // keep (site, sigma) pairs in the trajectory
};

struct Snapshot {
  double t;
  std::uint64_t visited;
  std::int64_t tip;        // d=1: sup of the visited set; d>=2: L-inf radius
  std::int64_t tip_axis0;  // max first coordinate of the visited set
  std::int64_t leftmost;   // min first coordinate
  std::int64_t active_tip; // max first coordinate over active particles
  std::uint64_t events;
};

struct GapRecord {
  std::int64_t x;
  double gap;  // sigma_x - sigma_{x-1}, recorded for x >= 1 in d = 1
};

struct Trajectory {
  int dim = 1;
  std::vector<Snapshot> snapshots;
  std::vector<GapRecord> gaps;
  Termination termination = Termination::Completed;
  bool explosion_suspected = false;
  // first-event-decile time span over last-event-decile time span: large
  // when events pile into vanishing time at the end of the run
  double density_ratio = 0.0;
  double end_time = 0.0;
  std::uint64_t events = 0;
  std::uint64_t visited = 0;
  std::uint64_t sigma_records = 0;
  std::uint64_t particles_materialized = 0;
  std::uint64_t jumps_total = 0;
  std::uint64_t jumps_axis0 = 0;
  double active_particle_count = 0.0;  // at end: materialized + bulk remainder
  std::vector<std::pair<Coord, double>> site_dump;  // when config.dump_sites

  bool operator==(const Trajectory& o) const {
    auto snap_eq = [](const Snapshot& a, const Snapshot& b) {
      return a.t == b.t && a.visited == b.visited && a.tip == b.tip &&
             a.tip_axis0 == b.tip_axis0 && a.leftmost == b.leftmost &&
             a.active_tip == b.active_tip && a.events == b.events;
    };
    if (snapshots.size() != o.snapshots.size() || gaps.size() != o.gaps.size()) return false;
    for (std::size_t i = 0; i < snapshots.size(); ++i)
      if (!snap_eq(snapshots[i], o.snapshots[i])) return false;
    for (std::size_t i = 0; i < gaps.size(); ++i)
      if (gaps[i].x != o.gaps[i].x || gaps[i].gap != o.gaps[i].gap) return false;
    return dim == o.dim && termination == o.termination &&
           explosion_suspected == o.explosion_suspected && end_time == o.end_time &&
           events == o.events && visited == o.visited &&
           jumps_total == o.jumps_total && jumps_axis0 == o.jumps_axis0;
  }
};

namespace sim_detail {

// Decimated event-time record: keeps every k-th event time with k doubling
// whenever the buffer fills, so the stored points stay uniform in event
// index at any run length. Used for the event-density growth heuristic.
class EventTimeline {
 public:
  void add(double t) {
    if (count_ % stride_ == 0) {
      if (times_.size() == kCap) {
        for (std::size_t i = 0; 2 * i < kCap; ++i) times_[i] = times_[2 * i];
        times_.resize(kCap / 2);
        stride_ *= 2;
        if (count_ % stride_ != 0) {
          ++count_;
          return;
        }
      }
      times_.push_back(t);
    }
    ++count_;
  }
  // span of the first decile of events over the span of the last decile;
  // large when the tail of the run packs events into vanishing time
  double density_ratio(double t_end) const {
    if (times_.size() < 20 || !(t_end > 0.0)) return 0.0;
    const std::size_t n = times_.size();
    const double t10 = times_[n / 10];
    const double t90 = times_[(9 * n) / 10];
    const double first_span = t10 - times_.front();
    const double last_span = t_end - t90;
    if (last_span <= 0.0) return std::numeric_limits<double>::infinity();
    return first_span / last_span;
  }

 private:
  static constexpr std::size_t kCap = 8192;
  std::vector<double> times_;
  std::uint64_t stride_ = 1;
  std::uint64_t count_ = 0;
};

struct Particle {
  Coord pos;
  RngStream stream;
};

struct Bulk {
  Coord site;
  std::uint64_t remaining;
  std::uint64_t departed = 0;
  RngStream order_stream;
};

struct Event {
  double t;
  std::uint64_t id;  // particle index, or kBulkBase + bulk index
  bool operator>(const Event& o) const { return t != o.t ? t > o.t : id > o.id; }
};

inline constexpr std::uint64_t kBulkBase = std::uint64_t(1) << 48;

}  // namespace sim_detail

class CombustionSimulator {
 public:
  explicit CombustionSimulator(SimulationConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.dim < 1 || cfg_.dim > kMaxDim)
      throw std::invalid_argument("simulation: dim must be in [1, " +
                                  std::to_string(kMaxDim) + "]");
    if (cfg_.event_cap == 0 || cfg_.site_cap == 0)
      throw std::invalid_argument("simulation: caps must be positive");
    if (cfg_.mode == SimMode::Trimmed && cfg_.dim < 2)
      throw std::invalid_argument("simulation: trimmed mode needs dim >= 2");
    if (!cfg_.mu.nontrivial())
      throw std::invalid_argument("simulation: mu(0) = 1 is the excluded trivial case");
    if (cfg_.sources.empty()) cfg_.sources.push_back(Coord{});
  }

  Trajectory run() {
    using namespace sim_detail;
    traj_ = Trajectory{};
    traj_.dim = cfg_.dim;
    t_ = 0.0;
    next_cadence_ = cfg_.record_cadence;
    next_event_snapshot_ = 1;

    for (const Coord& s : cfg_.sources) {
      if (visited_.count(s)) throw std::invalid_argument("simulation: duplicate source");
      visit_site(s, 0.0, /*activate=*/true, /*is_source=*/true);
    }
    snapshot(0.0);

    while (!queue_.empty()) {
      const Event ev = queue_.top();
      if (ev.t > cfg_.horizon) {
        traj_.termination = Termination::Completed;
        t_ = cfg_.horizon;
        break;
      }
      if (traj_.events >= cfg_.event_cap) {
        traj_.termination = Termination::EventCapHit;
        break;
      }
      // cadence snapshots describe the state just before time advances
      while (ev.t > next_cadence_ && next_cadence_ <= cfg_.horizon) {
        snapshot(next_cadence_);
        next_cadence_ += cfg_.record_cadence;
      }
      queue_.pop();
      t_ = ev.t;
      ++traj_.events;
      timeline_.add(t_);

      if (ev.id >= kBulkBase) {
        process_bulk_departure(ev);
      } else {
        process_jump(ev);
      }

      if (traj_.events == next_event_snapshot_) {
        snapshot(t_);
        next_event_snapshot_ *= 2;
      }
      if (traj_.visited >= cfg_.site_cap) {
        traj_.termination = Termination::SiteCapHit;
        break;
      }
    }
    if (queue_.empty() && traj_.termination == Termination::Completed) t_ = cfg_.horizon;

    traj_.end_time = t_;
    snapshot(t_);
    traj_.density_ratio = timeline_.density_ratio(t_);
    traj_.active_particle_count = static_cast<double>(particles_.size());
    for (const auto& b : bulks_) traj_.active_particle_count += static_cast<double>(b.remaining);
    if (traj_.termination != Termination::Completed) {
      // explosive either by an accelerating event profile or by an activity
      // backlog no bounded budget could drain
      const bool accelerating = traj_.density_ratio >= 10.0;
      const bool backlog =
          traj_.active_particle_count >= 10.0 * static_cast<double>(traj_.events);
      traj_.explosion_suspected = accelerating || backlog;
    }
    if (cfg_.dump_sites) {
      traj_.site_dump.reserve(visited_.size());
      for (const auto& [site, sigma] : visited_) traj_.site_dump.emplace_back(site, sigma);
      std::sort(traj_.site_dump.begin(), traj_.site_dump.end(),
                [](const auto& a, const auto& b) {
                  return a.second != b.second ? a.second < b.second : a.first.c < b.first.c;
                });
    }
    return traj_;
  }

  // total sleeping counts assigned to visited sites plus injected particles
  double conserved_particle_total() const { return conserved_total_; }

 private:
  using Event = sim_detail::Event;

  static std::uint64_t site_key(const Coord& s) {
    std::uint64_t h = 0xa0761d6478bd642fULL;
    for (std::int64_t v : s.c) h = detail::mix64(h ^ static_cast<std::uint64_t>(v));
    return h;
  }

  std::uint64_t eta_at(const Coord& s) const {
    RngStream st = derive_stream(cfg_.seed, stream_tag::eta,
                                 static_cast<std::int64_t>(site_key(s)));
    return cfg_.mu.sample(st);
  }

  void materialize_particle(const Coord& pos, RngStream stream, double first_jump_at) {
    particles_.push_back({pos, stream});
    ++traj_.particles_materialized;
    queue_.push(Event{first_jump_at, particles_.size() - 1});
  }

  void visit_site(const Coord& s, double now, bool activate, bool is_source) {
    visited_.emplace(s, now);
    ++traj_.visited;
    ++traj_.sigma_records;
    tip_axis0_ = std::max(tip_axis0_, s.c[0]);
    leftmost_ = std::min(leftmost_, s.c[0]);
    std::int64_t linf = 0;
    for (int i = 0; i < cfg_.dim; ++i) linf = std::max<std::int64_t>(linf, s.c[i] < 0 ? -s.c[i] : s.c[i]);
    linf_radius_ = std::max(linf_radius_, linf);

    if (cfg_.dim == 1 && s.c[0] >= 1) {
      Coord left = s;
      left.c[0] -= 1;
      auto it = visited_.find(left);
      if (it != visited_.end()) traj_.gaps.push_back({s.c[0], now - it->second});
    }

    if (!activate) return;
    if (cfg_.mode == SimMode::Trimmed) {
      if (planes_entered_.count(s.c[0])) return;  // sleeping removed from this plane
      planes_entered_.insert(s.c[0]);
    }
    std::uint64_t eta = eta_at(s);
    std::uint64_t count = eta;
    bool injected = false;
    if (eta == 0 && is_source) {
      count = 1;
      injected = true;
    }
    conserved_total_ += static_cast<double>(count);
    if (count == 0) return;
    if (count > cfg_.bulk_threshold) {
      sim_detail::Bulk b;
      b.site = s;
      b.remaining = count;
      b.order_stream = derive_stream(cfg_.seed, stream_tag::bulk,
                                     static_cast<std::int64_t>(site_key(s)));
      const double dt = b.order_stream.exponential(static_cast<double>(b.remaining));
      bulks_.push_back(b);
      queue_.push(Event{now + dt, sim_detail::kBulkBase + bulks_.size() - 1});
    } else {
      for (std::uint64_t j = 1; j <= count; ++j) {
        RngStream st = derive_stream(cfg_.seed, injected ? stream_tag::inject : stream_tag::walk,
                                     static_cast<std::int64_t>(site_key(s)),
                                     static_cast<std::int64_t>(j));
        const double dt = st.exponential();
        materialize_particle(s, st, now + dt);
      }
    }
  }

  void move_to_neighbor(Coord& pos, RngStream& stream) {
    const std::uint64_t v = stream.next_below(2 * static_cast<std::uint64_t>(cfg_.dim));
    const int axis = static_cast<int>(v >> 1);
    pos.c[axis] += (v & 1u) ? 1 : -1;
    ++traj_.jumps_total;
    if (axis == 0) ++traj_.jumps_axis0;
  }

  void arrive(const Coord& pos, double now) {
    if (!visited_.count(pos)) visit_site(pos, now, /*activate=*/true, /*is_source=*/false);
  }

  // arrive() can grow particles_/bulks_; never hold references across it
  void process_jump(const Event& ev) {
    Coord pos;
    {
      auto& p = particles_[ev.id];
      move_to_neighbor(p.pos, p.stream);
      pos = p.pos;
    }
    arrive(pos, ev.t);
    queue_.push(Event{ev.t + particles_[ev.id].stream.exponential(), ev.id});
  }

  void process_bulk_departure(const Event& ev) {
    const std::size_t bi = ev.id - sim_detail::kBulkBase;
    Coord site;
    std::uint64_t departed;
    {
      auto& b = bulks_[bi];
      ++b.departed;
      --b.remaining;
      site = b.site;
      departed = b.departed;
    }
    // departing particle performs its first jump now; its own stream drives
    // the direction and all later jumps
    RngStream st = derive_stream(cfg_.seed, stream_tag::walk,
                                 static_cast<std::int64_t>(site_key(site)),
                                 static_cast<std::int64_t>(departed));
    Coord pos = site;
    move_to_neighbor(pos, st);
    arrive(pos, ev.t);
    materialize_particle(pos, st, ev.t + st.exponential());
    auto& b = bulks_[bi];
    if (b.remaining > 0) {
      const double dt = b.order_stream.exponential(static_cast<double>(b.remaining));
      queue_.push(Event{ev.t + dt, ev.id});
    }
  }

  void snapshot(double at) {
    std::int64_t active_tip = std::numeric_limits<std::int64_t>::min();
    for (const auto& p : particles_) active_tip = std::max(active_tip, p.pos.c[0]);
    for (const auto& b : bulks_)
      if (b.remaining > 0) active_tip = std::max(active_tip, b.site.c[0]);
    if (active_tip == std::numeric_limits<std::int64_t>::min()) active_tip = 0;
    const std::int64_t tip = cfg_.dim == 1 ? tip_axis0_ : linf_radius_;
    if (!traj_.snapshots.empty() && traj_.snapshots.back().t == at &&
        traj_.snapshots.back().events == traj_.events)
      return;
    if (!traj_.snapshots.empty() && at < traj_.snapshots.back().t) return;
    traj_.snapshots.push_back(
        {at, traj_.visited, tip, tip_axis0_, leftmost_, active_tip, traj_.events});
  }

  SimulationConfig cfg_;
  Trajectory traj_;
  double t_ = 0.0;
  double next_cadence_ = 0.0;
  std::uint64_t next_event_snapshot_ = 1;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  std::vector<sim_detail::Particle> particles_;
  std::vector<sim_detail::Bulk> bulks_;
  std::unordered_map<Coord, double, CoordHash> visited_;
  std::unordered_set<std::int64_t> planes_entered_;
  sim_detail::EventTimeline timeline_;
  std::int64_t tip_axis0_ = std::numeric_limits<std::int64_t>::min();
  std::int64_t leftmost_ = std::numeric_limits<std::int64_t>::max();
  std::int64_t linf_radius_ = 0;
  double conserved_total_ = 0.0;
};

inline Trajectory run(const SimulationConfig& cfg) { return CombustionSimulator(cfg).run(); }

struct TrimmedPair {
  Trajectory full;
  Trajectory trimmed;
};

inline TrimmedPair trimmed_run(SimulationConfig cfg) {
  if (cfg.dim < 2) throw std::invalid_argument("trimmed_run: dim >= 2");
  TrimmedPair pair;
  cfg.mode = SimMode::Full;
  pair.full = run(cfg);
  cfg.mode = SimMode::Trimmed;
  pair.trimmed = run(cfg);
  return pair;
}

enum class SpreadVerdictMC { LinearLike, SuperlinearLike, Inconclusive };

inline const char* to_string(SpreadVerdictMC v) {
  switch (v) {
    case SpreadVerdictMC::LinearLike: return "LinearLike";
    case SpreadVerdictMC::SuperlinearLike: return "SuperlinearLike";
    default: return "Inconclusive";
  }
}

struct SpreadRateEstimate {
  std::vector<std::pair<double, double>> speed_windows;  // (t, tip/t)
  double loglog_slope = std::numeric_limits<double>::quiet_NaN();
  SpreadVerdictMC verdict = SpreadVerdictMC::Inconclusive;
};

// Windowed tip/t ratios plus the log-log slope over the latter (geometric)
// half of the trajectory.
inline SpreadRateEstimate spread_rate_estimate(const Trajectory& traj) {
  SpreadRateEstimate est;
  std::vector<const Snapshot*> snaps;
  for (const auto& s : traj.snapshots)
    if (s.t > 0.0 && s.tip >= 1 && (snaps.empty() || s.t > snaps.back()->t))
      snaps.push_back(&s);
  if (snaps.size() < 5) return est;
  const double t_lo = snaps.front()->t, t_hi = snaps.back()->t;
  const bool three_decades = t_hi / t_lo >= 1000.0;
  if (!three_decades && snaps.size() < 12) return est;

  // up to 10 geometric windows
  const int w = 10;
  const double r = std::pow(t_hi / t_lo, 1.0 / w);
  std::size_t idx = 0;
  for (int i = 1; i <= w; ++i) {
    const double target = t_lo * std::pow(r, i);
    while (idx + 1 < snaps.size() && snaps[idx + 1]->t <= target) ++idx;
    const double t = snaps[idx]->t;
    est.speed_windows.emplace_back(t, static_cast<double>(snaps[idx]->tip) / t);
  }

  const double t_mid = std::sqrt(t_lo * t_hi);
  std::vector<double> lx, ly;
  for (const auto* s : snaps) {
    if (s->t >= t_mid) {
      lx.push_back(std::log(s->t));
      ly.push_back(std::log(static_cast<double>(s->tip)));
    }
  }
  est.loglog_slope = lsq_slope(lx, ly);

  // Cumulative tip/t drifts with the early transient, so the stabilization
  // judgment uses window-local speeds (tip increments over time increments).
  std::vector<double> locals;
  for (std::size_t i = 1; i < est.speed_windows.size(); ++i) {
    const auto [t0, r0] = est.speed_windows[i - 1];
    const auto [t1, r1] = est.speed_windows[i];
    if (t1 > t0) locals.push_back((r1 * t1 - r0 * t0) / (t1 - t0));
  }
  // the last three locals span the longest windows and carry the most
  // statistics; "stable" means they sit in a common +-30% band
  bool stable = locals.size() >= 4;
  if (stable) {
    std::vector<double> last3(locals.end() - 3, locals.end());
    std::vector<double> sorted(last3);
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[1];
    for (double l : last3)
      if (!(std::fabs(l - med) <= 0.30 * std::max(med, 1e-9))) stable = false;
  }
  int increasing_streak = 0, max_streak = 0;
  for (std::size_t i = 1; i < locals.size(); ++i) {
    increasing_streak = locals[i] > locals[i - 1] ? increasing_streak + 1 : 0;
    max_streak = std::max(max_streak, increasing_streak);
  }
  if (std::isfinite(est.loglog_slope)) {
    if (est.loglog_slope >= 0.9 && est.loglog_slope <= 1.1 && stable)
      est.verdict = SpreadVerdictMC::LinearLike;
    else if (est.loglog_slope >= 1.2 && max_streak >= 3)
      est.verdict = SpreadVerdictMC::SuperlinearLike;
  }
  return est;
}

struct GapStats {
  std::vector<std::pair<std::int64_t, double>> max_gap_profile;  // (x, running max)
  std::uint64_t violations = 0;
  double c = 2.5;
  double ln_c_eps = 0.0;
  double bound_at(double x) const {
    const double b = c * std::log(x) / ln_c_eps;
    return b * b;
  }
};

// Running max of activation gaps against the envelope (c ln x / ln c_eps)^2.
inline GapStats activation_gap_stats(const std::vector<GapRecord>& gaps, double c_eps,
                                     double c = 2.5, std::int64_t x_min = 50) {
  if (!(c_eps > 0.0 && c_eps < 1.0))
    throw std::invalid_argument("activation_gap_stats: c_eps in (0,1)");
  GapStats st;
  st.c = c;
  st.ln_c_eps = std::log(c_eps);
  std::vector<GapRecord> sorted(gaps.begin(), gaps.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const GapRecord& a, const GapRecord& b) { return a.x < b.x; });
  double run_max = 0.0;
  for (const auto& g : sorted) {
    run_max = std::max(run_max, g.gap);
    st.max_gap_profile.emplace_back(g.x, run_max);
    if (g.x >= x_min && run_max >= st.bound_at(static_cast<double>(g.x))) ++st.violations;
  }
  return st;
}

}  // namespace combust
