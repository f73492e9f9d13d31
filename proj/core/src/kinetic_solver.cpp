#include "bcm/kinetic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "bcm/io.hpp"

namespace bcm {

namespace {

constexpr double kRoundingFloor = 1e-12;

DiagnosticsRow describe(double t, const PiecewiseConstantDensity& f) {
  const auto m = moments(f, 2);
  DiagnosticsRow row;
  row.t = t;
  row.mass = f.mass();
  row.mu1 = m.mean;
  row.mu2 = m.raw_moment(2);
  row.sigma = m.std_dev;
  row.max_level = f.max_level();
  const auto levels = f.levels();
  const auto first = std::find_if(levels.begin(), levels.end(), [](double v) { return v > 0.0; });
  const auto last = std::find_if(levels.rbegin(), levels.rend(), [](double v) { return v > 0.0; });
  row.first_cell = static_cast<std::size_t>(first - levels.begin());
  row.last_cell = levels.size() - 1 - static_cast<std::size_t>(last - levels.rbegin());
  return row;
}

}  // namespace

std::string to_string(NegativityPolicy policy) {
  return policy == NegativityPolicy::reject ? "reject" : "clamp_renormalize";
}

NegativityPolicy parse_negativity_policy(const std::string& text) {
  if (text == "reject") return NegativityPolicy::reject;
  if (text == "clamp_renormalize" || text == "clamp") return NegativityPolicy::clamp_renormalize;
  throw std::invalid_argument("unknown negativity policy '" + text + "' (expected reject or clamp_renormalize)");
}

void SolverConfig::validate() const {
  params.validate();
  if (cell_count < 2) throw std::invalid_argument("cell_count must be at least 2");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
  if (dt > horizon) throw std::invalid_argument("dt must not exceed the horizon");
  const double steps = horizon / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
    throw std::invalid_argument("horizon must be a whole number of dt steps");
  }
  for (double t : snapshot_times) {
    if (!(t >= 0.0 && t <= horizon)) {
      throw std::invalid_argument("snapshot time " + io::format_double(t) + " outside [0, horizon]");
    }
  }
  if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end())) {
    throw std::invalid_argument("snapshot times must be sorted");
  }
}

std::size_t SolverConfig::step_count() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }

NegativityError::NegativityError(std::size_t cell, double level, std::size_t step)
    : NumericalError("negative density " + io::format_double(level) + " in cell " + std::to_string(cell) +
                         " at step " + std::to_string(step) + "; reduce dt or use the clamp_renormalize policy",
                     step),
      cell_(cell),
      level_(level) {}

NonFiniteError::NonFiniteError(std::size_t step)
    : NumericalError("non-finite derivative at step " + std::to_string(step) + "; reduce dt", step) {}

KineticSolver::KineticSolver(SolverConfig cfg) : cfg_((cfg.validate(), std::move(cfg))), op_(cfg_.cell_count, cfg_.params) {}

PiecewiseConstantDensity KineticSolver::step(const PiecewiseConstantDensity& f, StepInfo* info) const {
  double sup = 0.0;
  const auto rate = op_.cell_rates(f, &sup);
  const double floor = kRoundingFloor * std::max(1.0, f.max_level());
  std::vector<double> next(f.cell_count());
  // Interactions only form convex combinations, so nothing can land outside
  // the hull of the current support; rates there are pure roundoff.
  const auto levels = f.levels();
  const auto first = static_cast<std::size_t>(
      std::find_if(levels.begin(), levels.end(), [](double v) { return v > 0.0; }) - levels.begin());
  const auto last = levels.size() - static_cast<std::size_t>(
      std::find_if(levels.rbegin(), levels.rend(), [](double v) { return v > 0.0; }) - levels.rbegin());
  double residual = 0.0;
  double clamped = 0.0;
  for (std::size_t c = 0; c < next.size(); ++c) {
    if (!std::isfinite(rate[c])) throw NonFiniteError(0);
    residual = std::max(residual, std::abs(rate[c]));
    if (c < first || c >= last) continue;
    double v = f.level(c) + cfg_.dt * rate[c];
    if (v < 0.0) {
      if (v < -floor) {
        if (cfg_.negativity_policy == NegativityPolicy::reject) throw NegativityError(c, v, 0);
        clamped -= v / static_cast<double>(next.size());
      }
      v = 0.0;
    }
    next[c] = v;
  }
  double raw = 0.0;
  for (double v : next) raw += v;
  raw /= static_cast<double>(next.size());
  if (info != nullptr) {
    info->raw_mass = raw + clamped;
    info->clamped_mass = clamped;
    info->residual = residual;
    info->derivative_sup = sup;
  }
  for (double& v : next) v /= raw;
  return PiecewiseConstantDensity(std::move(next));
}

SolveResult KineticSolver::solve(const PiecewiseConstantDensity& f0) const {
  if (f0.cell_count() != cfg_.cell_count) throw std::invalid_argument("solve: initial density grid does not match");
  const std::size_t steps = cfg_.step_count();

  std::vector<std::size_t> snap_steps;
  for (double t : cfg_.snapshot_times) {
    snap_steps.push_back(std::min<std::size_t>(steps, static_cast<std::size_t>(std::llround(t / cfg_.dt))));
  }

  SolveResult out{{}, {}, f0, 0.0, 0.0};
  out.diagnostics.reserve(steps + 1);
  const auto record_snapshots = [&](std::size_t n, const PiecewiseConstantDensity& f) {
    for (std::size_t s = 0; s < snap_steps.size(); ++s) {
      if (snap_steps[s] == n) {
        out.snapshots.push_back({cfg_.snapshot_times[s], io::round_significant(static_cast<double>(n) * cfg_.dt, 12), n, f});
      }
    }
  };

  PiecewiseConstantDensity f = f0;
  const double mu0 = moments(f0, 2).mean;
  out.diagnostics.push_back(describe(0.0, f0));
  record_snapshots(0, f0);
  for (std::size_t n = 1; n <= steps; ++n) {
    StepInfo info;
    try {
      f = step(f, &info);
    } catch (const NegativityError& e) {
      throw NegativityError(e.cell(), e.level(), n);
    } catch (const NonFiniteError&) {
      throw NonFiniteError(n);
    }
    auto& prev = out.diagnostics.back();
    prev.residual = info.residual;
    prev.derivative_sup = info.derivative_sup;
    out.clamped_mass_total += info.clamped_mass;
    auto row = describe(io::round_significant(static_cast<double>(n) * cfg_.dt, 12), f);
    row.mass = info.raw_mass;
    row.clamped_mass = out.clamped_mass_total;
    out.mean_drift = std::max(out.mean_drift, std::abs(row.mu1 - mu0));
    out.diagnostics.push_back(row);
    record_snapshots(n, f);
  }
  auto& last = out.diagnostics.back();
  const auto rate = op_.cell_rates(f, &last.derivative_sup);
  last.residual = 0.0;
  for (double r : rate) last.residual = std::max(last.residual, std::abs(r));
  out.final_density = std::move(f);
  return out;
}

PiecewiseLinearFunction derivative(const PiecewiseConstantDensity& f, const ModelParams& params) {
  return DerivativeOperator(f.cell_count(), params)(f);
}

PiecewiseConstantDensity euler_step(const PiecewiseConstantDensity& f, const SolverConfig& cfg) {
  return KineticSolver(cfg).step(f);
}

SolveResult solve(const PiecewiseConstantDensity& f0, const SolverConfig& cfg) { return KineticSolver(cfg).solve(f0); }

double stationarity_residual(const PiecewiseConstantDensity& f, const ModelParams& params) {
  const auto rate = DerivativeOperator(f.cell_count(), params).cell_rates(f);
  double best = 0.0;
  for (double r : rate) best = std::max(best, std::abs(r));
  return best;
}

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRow>& rows) {
  out << "t,mass,mu1,mu2,sigma,max_level,clamped_mass,residual\n";
  for (const auto& r : rows) {
    out << io::format_double(r.t) << ',' << io::format_double(r.mass) << ',' << io::format_double(r.mu1) << ','
        << io::format_double(r.mu2) << ',' << io::format_double(r.sigma) << ',' << io::format_double(r.max_level)
        << ',' << io::format_double(r.clamped_mass) << ',' << io::format_double(r.residual) << '\n';
  }
}

}  // namespace bcm
