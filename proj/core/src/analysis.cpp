#include "bcm/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "bcm/initial_conditions.hpp"
#include "bcm/io.hpp"

namespace bcm {

ConsensusReport classify(const PiecewiseConstantDensity& density, const ModelParams& params, double mass_threshold,
                         double level_floor) {
  ConsensusReport report;
  report.source = ReportSource::kinetic;
  report.mass_threshold = mass_threshold;
  const auto n = density.cell_count();
  const double h = density.cell_width();
  for (std::size_t c = 0; c < n;) {
    if (!(density.level(c) > level_floor)) {
      ++c;
      continue;
    }
    double mass = 0.0;
    double first = 0.0;
    for (; c < n && density.level(c) > level_floor; ++c) {
      mass += density.level(c) * h;
      first += density.level(c) * h * 0.5 * (density.cell_left(c) + density.cell_right(c));
    }
    ++report.raw_components;
    if (mass >= mass_threshold) report.components.push_back({first / mass, mass});
  }
  const double min_gap = params.delta - 2.0 / static_cast<double>(n);
  for (std::size_t k = 1; k < report.components.size(); ++k) {
    if (report.components[k].position - report.components[k - 1].position < min_gap) {
      report.classification = Classification::unresolved(report.components.size());
      report.note = "components closer than delta - 2/I";
      return report;
    }
  }
  if (report.components.size() == 1) {
    report.classification = Classification::total();
  } else if (report.components.empty()) {
    report.classification = Classification::unresolved(0);
    report.note = "no component above the mass threshold";
  } else {
    report.classification = Classification::partial(report.components.size());
  }
  report.frozen = report.classification.kind != Classification::Kind::unresolved;
  return report;
}

double first_half_center_of_mass(const PiecewiseConstantDensity& density) {
  double mass = 0.0;
  double first = 0.0;
  for (std::size_t c = 0; c < density.cell_count(); ++c) {
    const double lo = density.cell_left(c);
    const double hi = std::min(0.5, density.cell_right(c));
    if (hi <= lo) break;
    mass += density.level(c) * (hi - lo);
    first += density.level(c) * 0.5 * (hi * hi - lo * lo);
  }
  return mass > 0.0 ? first / mass : std::numeric_limits<double>::quiet_NaN();
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < count;) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

namespace {

void check_grid(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw std::invalid_argument(std::string(what) + " grid is empty");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw std::invalid_argument(std::string(what) + " grid must be strictly increasing");
  }
}

void run_point(ScanPoint& point, const PiecewiseConstantDensity& f0, const ScanSettings& settings) {
  try {
    SolverConfig cfg;
    cfg.params = ModelParams(point.delta, point.w);
    cfg.cell_count = settings.cell_count;
    cfg.dt = settings.dt;
    cfg.horizon = settings.horizon;
    cfg.negativity_policy = settings.negativity_policy;
    const auto result = KineticSolver(cfg).solve(f0);
    point.report = classify(result.final_density, cfg.params, settings.mass_threshold);
    point.report.steps = cfg.step_count();
    point.n_components = point.report.components.size();
    if (settings.component_cap > 0) point.n_components = std::min(point.n_components, settings.component_cap);
    point.first_half_com = first_half_center_of_mass(result.final_density);
  } catch (const std::exception& e) {
    point.error = e.what();
  }
}

std::string joined(const std::vector<Component>& comps, bool positions) {
  std::string out;
  for (const auto& c : comps) {
    if (!out.empty()) out += ';';
    out += io::format_double(io::round_significant(positions ? c.position : c.mass, 12));
  }
  return out;
}

}  // namespace

void ScanResult::write_csv(std::ostream& out) const {
  out << "delta,alpha,w,n_components,positions,masses,first_half_com\n";
  const auto num = [](double v) { return std::isnan(v) ? std::string() : io::format_double(io::round_significant(v, 12)); };
  for (const auto& p : points) {
    out << num(p.delta) << ',' << num(p.alpha) << ',' << num(p.w) << ',';
    if (p.error.empty()) {
      out << p.n_components << ',' << joined(p.report.components, true) << ',' << joined(p.report.components, false)
          << ',' << num(p.first_half_com);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

ScanResult scan_delta(const PiecewiseConstantDensity& f0, double w, const std::vector<double>& delta_grid,
                      const ScanSettings& settings) {
  check_grid(delta_grid, "delta");
  if (f0.cell_count() != settings.cell_count) throw std::invalid_argument("scan_delta: f0 does not match the grid");
  ScanResult result;
  result.delta_grid = delta_grid;
  result.w = w;
  for (double d : delta_grid) {
    ScanPoint p;
    p.delta = d;
    p.alpha = std::numeric_limits<double>::quiet_NaN();
    p.w = w;
    result.points.push_back(p);
  }
  parallel_for(result.points.size(), settings.threads, [&](std::size_t k) { run_point(result.points[k], f0, settings); });
  return result;
}

ScanResult scan_extremists(const std::vector<double>& alpha_grid, const std::vector<double>& delta_grid, double w,
                           const ScanSettings& settings) {
  check_grid(alpha_grid, "alpha");
  check_grid(delta_grid, "delta");
  if (alpha_grid.front() < 0.0 || alpha_grid.back() > 1.0) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (delta_grid.front() < 0.5 || delta_grid.back() > 1.0) throw std::invalid_argument("delta must lie in [1/2, 1]");
  ScanResult result;
  result.delta_grid = delta_grid;
  result.alpha_grid = alpha_grid;
  result.w = w;
  std::vector<PiecewiseConstantDensity> initial;
  for (double a : alpha_grid) initial.push_back(extremists_density(a, settings.cell_count));
  for (double d : delta_grid) {
    for (double a : alpha_grid) {
      ScanPoint p;
      p.delta = d;
      p.alpha = a;
      p.w = w;
      result.points.push_back(p);
    }
  }
  parallel_for(result.points.size(), settings.threads, [&](std::size_t k) {
    run_point(result.points[k], initial[k % alpha_grid.size()], settings);
  });
  return result;
}

}  // namespace bcm
