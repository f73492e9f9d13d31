#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcm/kernels.hpp"
#include "bcm/measures.hpp"
#include "bcm/params.hpp"

namespace bcm {

enum class NegativityPolicy { reject, clamp_renormalize };

std::string to_string(NegativityPolicy policy);
NegativityPolicy parse_negativity_policy(const std::string& text);

struct SolverConfig {
  ModelParams params;
  std::size_t cell_count = 200;
  double dt = 0.1;
  double horizon = 100.0;
  NegativityPolicy negativity_policy = NegativityPolicy::reject;
  std::vector<double> snapshot_times;

  /// Throws std::invalid_argument on an inconsistent configuration. The
  /// horizon must be a whole number of steps (relative tolerance 1e-9).
  void validate() const;
  std::size_t step_count() const;
};

/// Base of the errors raised while integrating; carries the step index.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class NegativityError : public NumericalError {
 public:
  NegativityError(std::size_t cell, double level, std::size_t step);
  std::size_t cell() const { return cell_; }
  double level() const { return level_; }

 private:
  std::size_t cell_;
  double level_;
};

class NonFiniteError : public NumericalError {
 public:
  explicit NonFiniteError(std::size_t step);
};

/// Per-step bookkeeping of one Euler step.
struct StepInfo {
  /// Mass of the projected Euler update before renormalization.
  double raw_mass = 1.0;
  double clamped_mass = 0.0;
  /// Largest cell average of |derivative| at the input density.
  double residual = 0.0;
  /// Sup norm of the derivative at the input density.
  double derivative_sup = 0.0;
};

struct DiagnosticsRow {
  double t = 0.0;
  double mass = 1.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sigma = 0.0;
  double max_level = 0.0;
  double clamped_mass = 0.0;
  double residual = 0.0;
  double derivative_sup = 0.0;
  std::size_t first_cell = 0;
  std::size_t last_cell = 0;
};

struct Snapshot {
  double requested_time = 0.0;
  double time = 0.0;
  std::size_t step = 0;
  PiecewiseConstantDensity density;
};

struct SolveResult {
  std::vector<Snapshot> snapshots;
  /// One row per state, t = 0 included. `residual` and `derivative_sup`
  /// describe the derivative evaluated at that state.
  std::vector<DiagnosticsRow> diagnostics;
  PiecewiseConstantDensity final_density;
  double clamped_mass_total = 0.0;
  double mean_drift = 0.0;
};

/// Forward Euler integration of the density equation with cell-average
/// projection onto the fixed grid. Holds the precomputed derivative operator.
class KineticSolver {
 public:
  explicit KineticSolver(SolverConfig cfg);

  const SolverConfig& config() const { return cfg_; }
  const DerivativeOperator& derivative_operator() const { return op_; }

  PiecewiseLinearFunction derivative(const PiecewiseConstantDensity& f) const { return op_(f); }

  /// One step: f + dt * derivative(f), averaged per cell and renormalized.
  /// Cell values below -1e-12 * max(1, max level) are treated per the
  /// negativity policy; smaller negatives are rounding and set to zero. Cells
  /// outside the hull of the support of f stay empty.
  PiecewiseConstantDensity step(const PiecewiseConstantDensity& f, StepInfo* info = nullptr) const;

  SolveResult solve(const PiecewiseConstantDensity& f0) const;

 private:
  SolverConfig cfg_;
  DerivativeOperator op_;
};

PiecewiseLinearFunction derivative(const PiecewiseConstantDensity& f, const ModelParams& params);
PiecewiseConstantDensity euler_step(const PiecewiseConstantDensity& f, const SolverConfig& cfg);
SolveResult solve(const PiecewiseConstantDensity& f0, const SolverConfig& cfg);

/// Largest cell average of |derivative(f)|; zero at stationary densities.
double stationarity_residual(const PiecewiseConstantDensity& f, const ModelParams& params);

/// Writes diagnostics.csv: t,mass,mu1,mu2,sigma,max_level,clamped_mass,residual.
void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRow>& rows);

}  // namespace bcm
