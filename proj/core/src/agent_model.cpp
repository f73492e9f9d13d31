#include "bcm/agent_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "bcm/io.hpp"

namespace bcm {

namespace {

double population_variance(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return acc / n;
}

PairEvent pair_event(std::vector<double>& opinions, Rng& rng, const ModelParams& params) {
  const auto n = opinions.size();
  PairEvent ev;
  ev.i = static_cast<std::size_t>(rng.below(n));
  ev.j = static_cast<std::size_t>(rng.below(n - 1));
  if (ev.j >= ev.i) ++ev.j;
  ev.before_i = opinions[ev.i];
  ev.before_j = opinions[ev.j];
  ev.interacted = std::abs(ev.before_i - ev.before_j) <= params.delta;
  if (ev.interacted) {
    const auto [xi, xj] = interact(ev.before_i, ev.before_j, params);
    opinions[ev.i] = xi;
    opinions[ev.j] = xj;
  }
  return ev;
}

}  // namespace

std::pair<double, double> interact(double x, double y, const ModelParams& params) {
  if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) {
    throw std::domain_error("interact: opinions must lie in [0, 1]");
  }
  if (std::abs(x - y) > params.delta) return {x, y};
  // x + (1-w)(y-x) equals w x + (1-w) y but never rounds outside [x, y].
  const double step = (1.0 - params.w) * (y - x);
  return {x + step, y - step};
}

OpinionState::OpinionState(std::vector<double> opinions, std::uint64_t seed, std::uint64_t stream)
    : opinions_(std::move(opinions)), rng_(seed, stream) {
  if (opinions_.size() < 2) throw std::invalid_argument("OpinionState needs at least two agents");
  for (double x : opinions_) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("OpinionState: opinions must lie in [0, 1]");
  }
}

PairEvent step_discrete(OpinionState& state, const ModelParams& params) {
  auto ev = pair_event(state.opinions_, state.rng_, params);
  ++state.steps_;
  return ev;
}

PairEvent step_auxiliary(OpinionState& state, const ModelParams& params) {
  const double dt = state.rng_.exponential(static_cast<double>(state.opinions_.size()));
  state.time_ += dt;
  auto ev = step_discrete(state, params);
  ev.dt = dt;
  return ev;
}

std::uint64_t advance_auxiliary(OpinionState& state, const ModelParams& params, double t_end) {
  const double rate = static_cast<double>(state.opinions_.size());
  std::uint64_t events = 0;
  while (true) {
    const double next = state.time_ + state.rng_.exponential(rate);
    if (next > t_end) break;
    state.time_ = next;
    pair_event(state.opinions_, state.rng_, params);
    ++state.steps_;
    ++events;
  }
  return events;
}

bool ClusterPartition::refines(const ClusterPartition& earlier) const {
  std::size_t agents = 0;
  for (const auto& b : earlier.blocks) agents += b.members.size();
  std::vector<std::size_t> owner(agents, 0);
  for (std::size_t k = 0; k < earlier.blocks.size(); ++k) {
    for (auto m : earlier.blocks[k].members) {
      if (m >= agents) return false;
      owner[m] = k;
    }
  }
  for (const auto& b : blocks) {
    for (auto m : b.members) {
      if (m >= agents || owner[m] != owner[b.members.front()]) return false;
    }
  }
  return true;
}

ClusterPartition clusters(std::span<const double> opinions, const ModelParams& params) {
  std::vector<std::size_t> order(opinions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return opinions[a] < opinions[b]; });
  ClusterPartition out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double x = opinions[order[k]];
    if (k == 0 || x - out.blocks.back().max_opinion > params.delta) {
      out.blocks.push_back({{}, x, x});
    }
    auto& block = out.blocks.back();
    block.members.push_back(order[k]);
    block.max_opinion = x;
  }
  return out;
}

double variance_drop_check(std::span<const double> before, std::span<const double> after, std::size_t i,
                           std::size_t j, const ModelParams& params) {
  if (before.size() != after.size() || i >= before.size() || j >= before.size() || i == j) {
    throw std::invalid_argument("variance_drop_check: inconsistent states or pair");
  }
  const double gap = before[i] - before[j];
  if (std::abs(gap) > params.delta) throw std::invalid_argument("variance_drop_check: the pair did not interact");
  const double n = static_cast<double>(before.size());
  const double predicted = 2.0 * params.w * (1.0 - params.w) / n * gap * gap;
  const double measured = population_variance(before) - population_variance(after);
  return std::abs(measured - predicted);
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record) {
  out << "step,time,mu1,mu2,sigma,ess_inf,ess_sup,n_clusters\n";
  for (const auto& r : record.rows) {
    out << r.step << ',' << io::format_double(r.time) << ',' << io::format_double(r.mu1) << ','
        << io::format_double(r.mu2) << ',' << io::format_double(r.sigma) << ',' << io::format_double(r.ess_inf) << ','
        << io::format_double(r.ess_sup) << ',' << r.n_clusters << '\n';
  }
}

namespace {

TrajectoryRow describe(const OpinionState& state, const ModelParams& params, Clock clock, double variance_drop) {
  const auto m = moments(state.opinions(), 2);
  TrajectoryRow row;
  row.step = state.step_count();
  row.time = clock == Clock::auxiliary ? state.poisson_time()
                                       : static_cast<double>(state.step_count()) / static_cast<double>(state.size());
  row.mu1 = m.mean;
  row.mu2 = m.raw_moment(2);
  row.sigma = m.std_dev;
  row.ess_inf = m.ess_inf;
  row.ess_sup = m.ess_sup;
  row.n_clusters = clusters(state, params).size();
  row.variance_drop = variance_drop;
  return row;
}

}  // namespace

FrozenRun run_until_frozen(OpinionState state, const ModelParams& params, const FreezeConfig& cfg) {
  params.validate();
  if (cfg.max_steps < 1 || cfg.freeze_window < 1) {
    throw std::invalid_argument("run_until_frozen: max_steps and freeze_window must be at least 1");
  }
  TrajectoryRecord record;
  const double scale = 2.0 * params.w * (1.0 - params.w) / static_cast<double>(state.size());
  double drop = 0.0;
  const auto is_frozen = [&] {
    const auto part = clusters(state, params);
    return std::all_of(part.blocks.begin(), part.blocks.end(),
                       [&](const ClusterBlock& b) { return b.diameter() < cfg.freeze_tol; });
  };
  record.rows.push_back(describe(state, params, cfg.clock, drop));
  bool frozen = is_frozen();
  std::uint64_t done = 0;
  while (!frozen && done < cfg.max_steps) {
    const auto chunk = std::min(cfg.freeze_window, cfg.max_steps - done);
    for (std::uint64_t s = 0; s < chunk; ++s) {
      const auto ev = cfg.clock == Clock::auxiliary ? step_auxiliary(state, params) : step_discrete(state, params);
      if (ev.interacted) drop += scale * (ev.before_i - ev.before_j) * (ev.before_i - ev.before_j);
    }
    done += chunk;
    record.rows.push_back(describe(state, params, cfg.clock, drop));
    frozen = is_frozen();
  }
  auto report = classify_agents(state, params, cfg.mass_threshold, cfg.freeze_tol);
  report.steps = state.step_count();
  report.frozen = frozen;
  if (!frozen) report.note = "max_steps reached before every cluster narrowed below freeze_tol";
  return {std::move(state), std::move(record), std::move(report)};
}

ConsensusReport classify_agents(std::span<const double> opinions, const ModelParams& params, double mass_threshold,
                                double freeze_tol) {
  const auto part = clusters(opinions, params);
  ConsensusReport report;
  report.source = ReportSource::agent;
  report.mass_threshold = mass_threshold;
  report.raw_components = part.size();
  const double n = static_cast<double>(opinions.size());
  bool wide = false;
  for (const auto& b : part.blocks) {
    wide = wide || b.diameter() > freeze_tol;
    const double mass = static_cast<double>(b.members.size()) / n;
    if (mass < mass_threshold) continue;
    double sum = 0.0;
    for (auto m : b.members) sum += opinions[m];
    report.components.push_back({sum / static_cast<double>(b.members.size()), mass});
  }
  if (wide) {
    report.classification = Classification::unresolved(report.components.size());
    report.note = "a cluster is wider than freeze_tol";
  } else if (report.components.size() == 1) {
    report.classification = Classification::total();
  } else {
    report.classification = Classification::partial(report.components.size());
  }
  return report;
}

}  // namespace bcm
