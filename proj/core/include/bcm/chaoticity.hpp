#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bcm/agent_model.hpp"
#include "bcm/kinetic_solver.hpp"
#include "bcm/measures.hpp"

namespace bcm {

struct ChaosSettings {
  std::vector<std::size_t> n_list{100, 1000, 10000};
  double t_check = 5.0;
  std::size_t seeds = 20;
  std::uint64_t base_seed = 1;
  /// Grid and step of the kinetic reference solve.
  std::size_t cell_count = 200;
  double dt = 0.1;
  std::vector<Clock> clocks{Clock::auxiliary};
  unsigned threads = 0;
};

struct ChaosRow {
  std::size_t n = 0;
  Clock clock = Clock::auxiliary;
  double median_kolmogorov = 0.0;
  double median_wasserstein = 0.0;
  std::vector<double> kolmogorov;
  std::vector<double> wasserstein;
};

struct ChaosResult {
  PiecewiseConstantDensity reference;
  std::vector<ChaosRow> rows;

  /// CSV: n,simulator,median_kolmogorov,median_wasserstein,seeds.
  void write_csv(std::ostream& out) const;
};

/// For each N, clock and seed: draws N opinions from m0 by inverse CDF, runs the
/// agent system to t_check (auxiliary: Poisson events up to t_check; discrete:
/// floor(N t_check) steps) and compares the empirical measure with the kinetic
/// solution at t_check. Seed k of every N uses stream k of base_seed.
ChaosResult chaoticity_check(const PiecewiseConstantDensity& m0, const ModelParams& params,
                             const ChaosSettings& settings);

}  // namespace bcm
