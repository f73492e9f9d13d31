#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "bcm/consensus.hpp"
#include "bcm/kinetic_solver.hpp"
#include "bcm/measures.hpp"
#include "bcm/params.hpp"

namespace bcm {

inline constexpr double kLevelFloor = 1e-10;

/// Components are maximal runs of cells with level > level_floor, reported at
/// their center of mass. Components lighter than mass_threshold are dropped.
/// Unresolved if two surviving components are closer than delta - 2/I.
ConsensusReport classify(const PiecewiseConstantDensity& density, const ModelParams& params,
                         double mass_threshold = 0.01, double level_floor = kLevelFloor);

/// Center of mass of the density restricted to [0, 1/2]; NaN if that half is
/// empty.
double first_half_center_of_mass(const PiecewiseConstantDensity& density);

/// Runs fn(0..count-1) on up to `threads` workers (0 means hardware
/// concurrency). Exceptions from fn are rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

struct ScanSettings {
  std::size_t cell_count = 200;
  double dt = 0.1;
  double horizon = 100.0;
  NegativityPolicy negativity_policy = NegativityPolicy::reject;
  double mass_threshold = 0.01;
  /// Component counts above the cap are reported as the cap ("cap or more").
  std::size_t component_cap = 7;
  unsigned threads = 0;
};

struct ScanPoint {
  double delta = 0.0;
  /// NaN for Delta-only scans.
  double alpha = 0.0;
  double w = 0.0;
  ConsensusReport report;
  std::size_t n_components = 0;
  double first_half_com = 0.0;
  /// Empty unless the solve failed.
  std::string error;
};

struct ScanResult {
  std::vector<double> delta_grid;
  /// Empty for Delta-only scans.
  std::vector<double> alpha_grid;
  double w = 0.0;
  /// Delta-major for extremist scans.
  std::vector<ScanPoint> points;

  /// CSV: delta,alpha,w,n_components,positions,masses,first_half_com. Positions
  /// and masses are ';'-separated. Failed points leave the result fields empty.
  void write_csv(std::ostream& out) const;
};

ScanResult scan_delta(const PiecewiseConstantDensity& f0, double w, const std::vector<double>& delta_grid,
                      const ScanSettings& settings);

/// Initial condition: one-cell blocks at 0, 1/2 and 1 with masses
/// (1-alpha)/2, alpha, (1-alpha)/2. Delta values must lie in [1/2, 1].
ScanResult scan_extremists(const std::vector<double>& alpha_grid, const std::vector<double>& delta_grid, double w,
                           const ScanSettings& settings);

}  // namespace bcm
