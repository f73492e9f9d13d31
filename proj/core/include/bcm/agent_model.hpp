#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "bcm/consensus.hpp"
#include "bcm/measures.hpp"
#include "bcm/params.hpp"
#include "bcm/rng.hpp"

namespace bcm {

/// Pairwise update: if |x - y| <= delta both move to the convex combinations
/// (w x + (1-w) y, w y + (1-w) x), otherwise they are unchanged. Throws
/// std::domain_error if x or y is outside [0, 1].
std::pair<double, double> interact(double x, double y, const ModelParams& params);

/// What one pair event did.
struct PairEvent {
  std::size_t i = 0;
  std::size_t j = 0;
  double before_i = 0.0;
  double before_j = 0.0;
  bool interacted = false;
  /// Exponential waiting time before the event (auxiliary clock only).
  double dt = 0.0;
};

/// Opinions of N >= 2 agents, the step and Poisson clocks, and the generator.
class OpinionState {
 public:
  OpinionState(std::vector<double> opinions, std::uint64_t seed, std::uint64_t stream = 0);

  std::size_t size() const { return opinions_.size(); }
  std::span<const double> opinions() const { return opinions_; }
  double opinion(std::size_t i) const { return opinions_[i]; }
  std::uint64_t step_count() const { return steps_; }
  double poisson_time() const { return time_; }
  std::uint64_t seed() const { return rng_.seed(); }
  Rng& rng() { return rng_; }

  friend bool operator==(const OpinionState&, const OpinionState&) = default;

 private:
  friend PairEvent step_discrete(OpinionState&, const ModelParams&);
  friend PairEvent step_auxiliary(OpinionState&, const ModelParams&);
  friend std::uint64_t advance_auxiliary(OpinionState&, const ModelParams&, double);

  std::vector<double> opinions_;
  std::uint64_t steps_ = 0;
  double time_ = 0.0;
  Rng rng_;
};

/// One discrete step: an unordered pair drawn uniformly among the N(N-1)/2
/// pairs interacts. Mutates the state in place.
PairEvent step_discrete(OpinionState& state, const ModelParams& params);

/// One event of the Poisson-clock system: the clock advances by an Exp(N)
/// waiting time, then the same pair event as step_discrete fires.
PairEvent step_auxiliary(OpinionState& state, const ModelParams& params);

/// Fires every Poisson event with time <= t_end and leaves the clock at the
/// last event time. Returns the number of events.
std::uint64_t advance_auxiliary(OpinionState& state, const ModelParams& params, double t_end);

enum class Clock { discrete, auxiliary };

/// Agents connected by chains of pairwise gaps <= delta.
struct ClusterBlock {
  /// Agent indices sorted by opinion.
  std::vector<std::size_t> members;
  double min_opinion = 0.0;
  double max_opinion = 0.0;

  double diameter() const { return max_opinion - min_opinion; }
};

struct ClusterPartition {
  /// Blocks ordered by opinion.
  std::vector<ClusterBlock> blocks;

  std::size_t size() const { return blocks.size(); }
  /// True if every block here lies inside a single block of `earlier`.
  bool refines(const ClusterPartition& earlier) const;
};

ClusterPartition clusters(std::span<const double> opinions, const ModelParams& params);
inline ClusterPartition clusters(const OpinionState& state, const ModelParams& params) {
  return clusters(state.opinions(), params);
}

/// |measured drop of the population variance - (2w(1-w)/N)(x_i - x_j)^2| for
/// one interacting step. Throws std::invalid_argument if the pair was farther
/// apart than delta before the step.
double variance_drop_check(std::span<const double> before, std::span<const double> after, std::size_t i,
                           std::size_t j, const ModelParams& params);

struct TrajectoryRow {
  std::uint64_t step = 0;
  double time = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sigma = 0.0;
  double ess_inf = 0.0;
  double ess_sup = 0.0;
  std::size_t n_clusters = 0;
  /// Sum of (2w(1-w)/N)(x_i - x_j)^2 over interacting steps so far.
  double variance_drop = 0.0;
};

struct TrajectoryRecord {
  std::vector<TrajectoryRow> rows;
};

/// CSV with columns step,time,mu1,mu2,sigma,ess_inf,ess_sup,n_clusters.
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record);

struct FreezeConfig {
  std::uint64_t max_steps = 1'000'000;
  /// The freeze test runs, and a trajectory row is recorded, every
  /// freeze_window steps.
  std::uint64_t freeze_window = 1000;
  double freeze_tol = 1e-9;
  double mass_threshold = 0.01;
  Clock clock = Clock::discrete;
};

struct FrozenRun {
  OpinionState state;
  TrajectoryRecord trajectory;
  ConsensusReport report;
};

/// Runs until every cluster has diameter below freeze_tol (clusters are then
/// separated by more than delta, so the state is absorbing) or max_steps.
FrozenRun run_until_frozen(OpinionState state, const ModelParams& params, const FreezeConfig& cfg);

/// Clusters reported at their barycenters with mass |C|/N; clusters below the
/// mass threshold are dropped. Unresolved if a cluster is wider than freeze_tol.
ConsensusReport classify_agents(std::span<const double> opinions, const ModelParams& params,
                                double mass_threshold = 0.01, double freeze_tol = 1e-9);
inline ConsensusReport classify_agents(const OpinionState& state, const ModelParams& params,
                                       double mass_threshold = 0.01, double freeze_tol = 1e-9) {
  return classify_agents(state.opinions(), params, mass_threshold, freeze_tol);
}

}  // namespace bcm
