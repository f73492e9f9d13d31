#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bcm/measures.hpp"
#include "bcm/params.hpp"

namespace bcm {

/// A point where a piecewise-linear function of x changes: the value jumps by
/// `jump` and the slope changes by `slope_change`. A knot list describes the
/// function that is zero left of its first knot.
struct KernelKnot {
  double x;
  double jump;
  double slope_change;
};

/// Evaluates a knot list at x (right-continuous).
double evaluate_knots(std::span<const KernelKnot> knots, double x);

/// Restricts a knot list to [0, 1] as an explicit piecewise-linear function.
/// Knots left of 0 fold into the starting value; knots at or right of 1 are
/// dropped. Knots need not be sorted.
PiecewiseLinearFunction knots_to_function(std::vector<KernelKnot> knots);

/// One of the closed-form pair kernels, with the case row that produced it.
struct KernelShape {
  int row = 0;
  std::vector<KernelKnot> knots;

  double operator()(double x) const { return evaluate_knots(knots, x); }
};

/// Loss kernel: integral over z in [x-delta, x+delta] of H(x-xi) H(z-xj).
/// Rows: 1 xi <= xj-delta, 2 xj-delta <= xi <= xj+delta, 3 xi >= xj+delta.
KernelShape loss_kernel(double xi, double xj, double delta);

/// Ordering anchors of the gain kernel.
struct GainAnchors {
  double m;  // max((1-w) xi + w xj, xi - w delta)
  double a;  // xi + w delta
  double b;  // xj - (1-w) delta
  double c;  // xj + (1-w) delta
};

GainAnchors gain_anchors(double xi, double xj, const ModelParams& params);

inline constexpr int kLossRows = 3;
inline constexpr int kGainRows = 12;

/// First gain row (1..12) whose anchor ordering holds, 0 if none does.
int gain_row(const GainAnchors& anchors);
bool gain_ordering_holds(const GainAnchors& anchors, int row);

/// Gain kernel: integral over u in [-delta, delta] of
/// H(x + w u - xi) H(x - (1-w) u - xj), dispatched on the anchor ordering.
KernelShape gain_kernel(double xi, double xj, const ModelParams& params);

/// The formula of one specific row. Several orderings can hold at once when
/// anchors tie; every such row must give the same function. Throws
/// std::domain_error if the row's ordering does not hold.
KernelShape gain_kernel_row(double xi, double xj, const ModelParams& params, int row);

/// Contribution of the cell pair (i, j) to the time derivative, before the
/// factor 2 a_i a_j: the loss and gain kernels combined over the four cell
/// edge pairs as K(l_i,l_j) + K(r_i,r_j) - K(l_i,r_j) - K(r_i,l_j).
struct DerivativeKernelEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  PiecewiseLinearFunction loss;
  PiecewiseLinearFunction gain;
};

DerivativeKernelEntry kernel_entry(std::size_t i, std::size_t j, std::size_t cells, const ModelParams& params);

/// Exact time derivative of the density equation for piecewise-constant
/// densities on a fixed grid.
///
/// Writing f = sum_k b_k H(x - k/I) with b_k = a_k - a_{k-1}, the derivative is
/// 2 sum_{k,l} b_k b_l (gain_kernel - loss_kernel)(x; k/I, l/I). Kernel knots
/// depend only on the grid and the parameters, so they are built and sorted
/// once; each evaluation is a single weighted sweep over the sorted knots.
class DerivativeOperator {
 public:
  DerivativeOperator(std::size_t cells, const ModelParams& params);

  std::size_t cell_count() const { return cells_; }
  const ModelParams& params() const { return params_; }
  std::size_t knot_count() const { return knots_.size(); }

  PiecewiseLinearFunction operator()(const PiecewiseConstantDensity& f) const;

  /// Cell averages of the derivative, integrated during the sweep in extended
  /// precision. Optionally reports the sup norm of the derivative. Exactly
  /// equivariant under reflection x -> 1 - x of the density.
  std::vector<double> cell_rates(const PiecewiseConstantDensity& f, double* sup_norm = nullptr) const;

  /// Number of edge pairs dispatched to each row (index 0 is row 1).
  const std::array<std::size_t, kLossRows>& loss_row_counts() const { return loss_rows_; }
  const std::array<std::size_t, kGainRows>& gain_row_counts() const { return gain_rows_; }

 private:
  struct WeightedKnot {
    long double x;
    long double jump;
    long double slope_change;
    std::uint32_t pair;
  };

  std::vector<long double> pair_weights(std::span<const double> levels) const;
  // Cell averages of the derivative on the first `count` cells.
  std::vector<long double> sweep_cells(std::span<const double> levels, std::size_t count, long double& sup) const;

  std::size_t cells_;
  ModelParams params_;
  std::vector<WeightedKnot> knots_;
  std::array<std::size_t, kLossRows> loss_rows_{};
  std::array<std::size_t, kGainRows> gain_rows_{};
};

}  // namespace bcm
