#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "bcm/rng.hpp"

namespace bcm {

/// Unit-mass tolerance enforced when a density is constructed.
inline constexpr double kMassTolerance = 1e-12;

/// Probability density on [0,1] that is constant on each of I equal cells.
///
/// Cell c covers [c/I, (c+1)/I). Levels are nonnegative and (1/I) * sum(levels)
/// equals 1 within kMassTolerance; construction throws std::invalid_argument
/// otherwise.
class PiecewiseConstantDensity {
 public:
  explicit PiecewiseConstantDensity(std::vector<double> levels);

  /// Scales nonnegative levels to unit mass. Throws if the mass is zero.
  static PiecewiseConstantDensity normalized(std::vector<double> levels);
  static PiecewiseConstantDensity uniform(std::size_t cells);

  std::size_t cell_count() const { return levels_.size(); }
  double cell_width() const { return 1.0 / static_cast<double>(levels_.size()); }
  double cell_left(std::size_t c) const;
  double cell_right(std::size_t c) const;
  double level(std::size_t c) const { return levels_[c]; }
  std::span<const double> levels() const { return levels_; }

  double mass() const;
  double max_level() const;
  double cdf(double x) const;

  friend bool operator==(const PiecewiseConstantDensity&, const PiecewiseConstantDensity&) = default;

 private:
  std::vector<double> levels_;
};

/// Piecewise-linear function on [0,1], possibly discontinuous at breakpoints.
///
/// Segment k spans [breakpoints[k], breakpoints[k+1]] and is given by its value
/// just right of the left breakpoint plus a slope. The function is evaluated
/// right-continuously; at x = 1 the left limit of the last segment is used.
class PiecewiseLinearFunction {
 public:
  struct Segment {
    double value_at_left;
    double slope;
  };

  PiecewiseLinearFunction(std::vector<double> breakpoints, std::vector<Segment> segments);

  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const Segment> segments() const { return segments_; }
  std::size_t segment_count() const { return segments_.size(); }

  double operator()(double x) const;
  double left_limit(double x) const;

  /// Integral over [a, b] with 0 <= a <= b <= 1, computed segment by segment.
  double integral(double a = 0.0, double b = 1.0) const;
  /// Integral of x^n times the function over [0, 1].
  double moment_integral(int n) const;
  /// Largest absolute value over all segment endpoints (one-sided limits).
  double sup_norm() const;

  /// Per-cell averages on the uniform grid of `cells` cells (exact, no sampling).
  std::vector<double> cell_averages(std::size_t cells) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<Segment> segments_;
};

/// Uniform-weight empirical measure (1/N) sum delta_{x_i} on [0,1].
/// Atoms are stored sorted; every operation is invariant under atom order.
class EmpiricalMeasure {
 public:
  explicit EmpiricalMeasure(std::vector<double> atoms);

  std::size_t size() const { return atoms_.size(); }
  std::span<const double> atoms() const { return atoms_; }

  friend bool operator==(const EmpiricalMeasure&, const EmpiricalMeasure&) = default;

 private:
  std::vector<double> atoms_;
};

struct MomentSummary {
  double mean = 0.0;
  /// raw[n] is the n-th raw moment; raw[0] == 1.
  std::vector<double> raw;
  double std_dev = 0.0;
  double ess_inf = 0.0;
  double ess_sup = 0.0;

  double raw_moment(int n) const { return raw.at(static_cast<std::size_t>(n)); }
  double variance() const { return std_dev * std_dev; }
};

MomentSummary moments(const PiecewiseConstantDensity& density, int max_order = 2);
MomentSummary moments(const EmpiricalMeasure& measure, int max_order = 2);
MomentSummary moments(std::span<const double> atoms, int max_order = 2);

/// Exact integral of |x - center| against the density.
double mean_abs_deviation(const PiecewiseConstantDensity& density, double center);

/// CDF of a density or empirical measure: piecewise linear with jumps.
///
/// Stored as sorted knots carrying the left and right limits of the CDF; the
/// CDF is linear between consecutive knots, and equals 0 before the first knot
/// and 1 after the last.
class Cdf {
 public:
  struct Knot {
    double x;
    double below;  // F(x-)
    double above;  // F(x+)
  };

  Cdf(const PiecewiseConstantDensity& density);  // NOLINT(google-explicit-constructor)
  Cdf(const EmpiricalMeasure& measure);          // NOLINT(google-explicit-constructor)

  std::span<const Knot> knots() const { return knots_; }
  double operator()(double x) const;
  double left_limit(double x) const;

 private:
  std::vector<Knot> knots_;
};

/// sup_x |F_a(x) - F_b(x)|, exact over the merged knot set.
double kolmogorov_distance(const Cdf& a, const Cdf& b);
/// Integral over [0,1] of |F_a - F_b|, exact piecewise integration.
double wasserstein1_distance(const Cdf& a, const Cdf& b);

/// N i.i.d. draws from the density by exact inverse-CDF sampling.
std::vector<double> sample(const PiecewiseConstantDensity& density, std::size_t n, Rng& rng);

/// CSV with header `x_left,x_right,level`, one row per cell.
void write_density_csv(std::ostream& out, const PiecewiseConstantDensity& density);
PiecewiseConstantDensity read_density_csv(std::istream& in);
/// Single-column CSV with header `atom`.
void write_atoms_csv(std::ostream& out, std::span<const double> atoms);
std::vector<double> read_atoms_csv(std::istream& in);

}  // namespace bcm
