#include "bcm/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bcm {

namespace {

template <typename T>
T grid_point(std::size_t k, std::size_t cells) {
  return k == cells ? T(1) : static_cast<T>(k) / static_cast<T>(cells);
}

template <typename T>
struct Knot {
  T x;
  T jump;
  T slope_change;
};

template <typename T>
struct Shape {
  int row;
  std::vector<Knot<T>> knots;
};

template <typename T>
struct Anchors {
  T p;  // (1-w) xi + w xj
  T q;  // xi - w delta
  T m;
  T a;
  T b;
  T c;
};

template <typename T>
Anchors<T> make_anchors(T xi, T xj, T delta, T w) {
  const T beta = T(1) - w;
  Anchors<T> g;
  g.p = beta * xi + w * xj;
  g.q = xi - w * delta;
  g.m = std::max(g.p, g.q);
  g.a = xi + w * delta;
  g.b = xj - beta * delta;
  g.c = xj + beta * delta;
  return g;
}

enum Anchor { kM, kA, kB, kC };

// Anchor orderings of the twelve gain rows, smallest first.
constexpr std::array<std::array<Anchor, 4>, kGainRows> kGainOrder{{
    {kM, kA, kB, kC},
    {kA, kM, kB, kC},
    {kM, kB, kA, kC},
    {kA, kB, kM, kC},
    {kM, kB, kC, kA},
    {kA, kB, kC, kM},
    {kB, kM, kA, kC},
    {kB, kA, kM, kC},
    {kB, kM, kC, kA},
    {kB, kA, kC, kM},
    {kB, kC, kM, kA},
    {kB, kC, kA, kM},
}};

template <typename T>
T anchor_value(const Anchors<T>& g, Anchor a) {
  switch (a) {
    case kM: return g.m;
    case kA: return g.a;
    case kB: return g.b;
    case kC: return g.c;
  }
  return T(0);
}

template <typename T>
bool ordering_holds(const Anchors<T>& g, int row) {
  const auto& order = kGainOrder[static_cast<std::size_t>(row - 1)];
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    if (!(anchor_value(g, order[k]) <= anchor_value(g, order[k + 1]))) return false;
  }
  return true;
}

template <typename T>
int match_row(const Anchors<T>& g) {
  for (int r = 1; r <= kGainRows; ++r) {
    if (ordering_holds(g, r)) return r;
  }
  return 0;
}

template <typename T>
Shape<T> loss_shape(T xi, T xj, T delta) {
  // Pieces: 0, then x - (xj - delta) with slope 1, then 2 delta.
  if (xi <= xj - delta) return {1, {{xj - delta, T(0), T(1)}, {xj + delta, T(0), T(-1)}}};
  if (xi <= xj + delta) return {2, {{xi, xi - xj + delta, T(1)}, {xj + delta, T(0), T(-1)}}};
  return {3, {{xi, 2 * delta, T(0)}}};
}

// Gain pieces, each affine in x:
//   L = (x - xj)/(1-w) + delta             zero at b, 2 delta at c
//   M = (x - xj)/(1-w) - (xi - x)/w         zero at p
//   R = delta - (xi - x)/w                  zero at q, 2 delta at a
//   S = 2 delta
// The transitions M->L at a, M->R at c, L->S at c and R->S at a are
// continuous for every xi, xj, so only the first knot of a row can jump.
template <typename T>
Shape<T> row_shape(const Anchors<T>& g, int row, T delta, T w) {
  const T sl = T(1) / (T(1) - w);
  const T sr = T(1) / w;
  const T sm = sl + sr;
  switch (row) {
    case 1:
    case 2:
      return {row, {{g.b, T(0), sl}, {g.c, T(0), -sl}}};
    case 3:
      return {row, {{g.b, (g.b - g.a) * sr, sm}, {g.a, T(0), sl - sm}, {g.c, T(0), -sl}}};
    case 4:
    case 8:
      return {row, {{g.m, (g.m - g.b) * sl, sl}, {g.c, T(0), -sl}}};
    case 5:
      return {row, {{g.b, (g.b - g.a) * sr, sm}, {g.c, T(0), sr - sm}, {g.a, T(0), -sr}}};
    case 6:
    case 10:
    case 12:
      return {row, {{g.m, 2 * delta, T(0)}}};
    case 7:
      return {row, {{g.m, (g.m - g.p) * sm, sm}, {g.a, T(0), sl - sm}, {g.c, T(0), -sl}}};
    case 9:
      return {row, {{g.m, (g.m - g.p) * sm, sm}, {g.c, T(0), sr - sm}, {g.a, T(0), -sr}}};
    case 11:
      return {row, {{g.m, (g.m - g.q) * sr, sr}, {g.a, T(0), -sr}}};
    default:
      throw std::logic_error("gain kernel: no ordering row matched");
  }
}

template <typename T>
Shape<T> gain_shape(T xi, T xj, T delta, T w) {
  const auto g = make_anchors(xi, xj, delta, w);
  return row_shape(g, match_row(g), delta, w);
}

KernelShape to_public(const Shape<double>& s) {
  KernelShape out;
  out.row = s.row;
  for (const auto& k : s.knots) out.knots.push_back({k.x, k.jump, k.slope_change});
  return out;
}

}  // namespace

double evaluate_knots(std::span<const KernelKnot> knots, double x) {
  double value = 0.0;
  for (const auto& k : knots) {
    if (k.x <= x) value += k.jump + k.slope_change * (x - k.x);
  }
  return value;
}

PiecewiseLinearFunction knots_to_function(std::vector<KernelKnot> knots) {
  std::sort(knots.begin(), knots.end(), [](const KernelKnot& a, const KernelKnot& b) { return a.x < b.x; });
  long double value = 0.0L;
  long double slope = 0.0L;
  std::size_t idx = 0;
  for (; idx < knots.size() && knots[idx].x <= 0.0; ++idx) {
    value += knots[idx].jump + static_cast<long double>(knots[idx].slope_change) * (0.0L - knots[idx].x);
    slope += knots[idx].slope_change;
  }
  std::vector<double> breakpoints{0.0};
  std::vector<PiecewiseLinearFunction::Segment> segments;
  double prev = 0.0;
  while (idx < knots.size() && knots[idx].x < 1.0) {
    const double x = knots[idx].x;
    segments.push_back({static_cast<double>(value), static_cast<double>(slope)});
    breakpoints.push_back(x);
    value += slope * (static_cast<long double>(x) - prev);
    for (; idx < knots.size() && knots[idx].x == x; ++idx) {
      value += knots[idx].jump;
      slope += knots[idx].slope_change;
    }
    prev = x;
  }
  segments.push_back({static_cast<double>(value), static_cast<double>(slope)});
  breakpoints.push_back(1.0);
  return PiecewiseLinearFunction(std::move(breakpoints), std::move(segments));
}

KernelShape loss_kernel(double xi, double xj, double delta) { return to_public(loss_shape(xi, xj, delta)); }

GainAnchors gain_anchors(double xi, double xj, const ModelParams& params) {
  const auto g = make_anchors(xi, xj, params.delta, params.w);
  return {g.m, g.a, g.b, g.c};
}

int gain_row(const GainAnchors& anchors) {
  return match_row(Anchors<double>{0.0, 0.0, anchors.m, anchors.a, anchors.b, anchors.c});
}

bool gain_ordering_holds(const GainAnchors& anchors, int row) {
  if (row < 1 || row > kGainRows) throw std::out_of_range("gain row must lie in 1..12");
  return ordering_holds(Anchors<double>{0.0, 0.0, anchors.m, anchors.a, anchors.b, anchors.c}, row);
}

KernelShape gain_kernel(double xi, double xj, const ModelParams& params) {
  return to_public(gain_shape(xi, xj, params.delta, params.w));
}

KernelShape gain_kernel_row(double xi, double xj, const ModelParams& params, int row) {
  const auto g = make_anchors(xi, xj, params.delta, params.w);
  if (row < 1 || row > kGainRows) throw std::out_of_range("gain row must lie in 1..12");
  if (!ordering_holds(g, row)) throw std::domain_error("gain row " + std::to_string(row) + " ordering does not hold");
  return to_public(row_shape(g, row, params.delta, params.w));
}

DerivativeKernelEntry kernel_entry(std::size_t i, std::size_t j, std::size_t cells, const ModelParams& params) {
  if (i >= cells || j >= cells) throw std::out_of_range("kernel_entry: cell index out of range");
  const double li = grid_point<double>(i, cells);
  const double ri = grid_point<double>(i + 1, cells);
  const double lj = grid_point<double>(j, cells);
  const double rj = grid_point<double>(j + 1, cells);
  const std::array<std::array<double, 3>, 4> combos{{{li, lj, 1.0}, {ri, rj, 1.0}, {li, rj, -1.0}, {ri, lj, -1.0}}};
  std::vector<KernelKnot> loss;
  std::vector<KernelKnot> gain;
  for (const auto& [xi, xj, sign] : combos) {
    for (auto k : loss_kernel(xi, xj, params.delta).knots) {
      loss.push_back({k.x, sign * k.jump, sign * k.slope_change});
    }
    for (auto k : gain_kernel(xi, xj, params).knots) {
      gain.push_back({k.x, sign * k.jump, sign * k.slope_change});
    }
  }
  return {i, j, knots_to_function(std::move(loss)), knots_to_function(std::move(gain))};
}

DerivativeOperator::DerivativeOperator(std::size_t cells, const ModelParams& params) : cells_(cells), params_(params) {
  if (cells < 1) throw std::invalid_argument("DerivativeOperator: need at least one cell");
  params_.validate();
  const std::size_t edges = cells + 1;
  knots_.reserve(edges * edges * 6);
  const long double delta = params_.delta;
  const long double w = params_.w;
  for (std::size_t k = 0; k < edges; ++k) {
    const auto xi = grid_point<long double>(k, cells);
    for (std::size_t l = 0; l < edges; ++l) {
      const auto xj = grid_point<long double>(l, cells);
      const auto pair = static_cast<std::uint32_t>(k * edges + l);
      const auto loss = loss_shape(xi, xj, delta);
      const auto gain = gain_shape(xi, xj, delta, w);
      ++loss_rows_[static_cast<std::size_t>(loss.row - 1)];
      ++gain_rows_[static_cast<std::size_t>(gain.row - 1)];
      for (const auto& kn : loss.knots) {
        if (kn.x < 1.0L) knots_.push_back({kn.x, -2 * kn.jump, -2 * kn.slope_change, pair});
      }
      for (const auto& kn : gain.knots) {
        if (kn.x < 1.0L) knots_.push_back({kn.x, 2 * kn.jump, 2 * kn.slope_change, pair});
      }
    }
  }
  std::stable_sort(knots_.begin(), knots_.end(), [](const WeightedKnot& a, const WeightedKnot& b) { return a.x < b.x; });
}

std::vector<long double> DerivativeOperator::pair_weights(std::span<const double> levels) const {
  if (levels.size() != cells_) throw std::invalid_argument("DerivativeOperator: density grid does not match");
  const std::size_t edges = cells_ + 1;
  std::vector<long double> b(edges);
  for (std::size_t k = 0; k < edges; ++k) {
    const long double right = k < cells_ ? levels[k] : 0.0;
    const long double left = k > 0 ? levels[k - 1] : 0.0;
    b[k] = right - left;
  }
  std::vector<long double> weight(edges * edges);
  for (std::size_t k = 0; k < edges; ++k) {
    for (std::size_t l = 0; l < edges; ++l) weight[k * edges + l] = b[k] * b[l];
  }
  return weight;
}

PiecewiseLinearFunction DerivativeOperator::operator()(const PiecewiseConstantDensity& f) const {
  const auto weight = pair_weights(f.levels());
  long double value = 0.0L;
  long double slope = 0.0L;
  std::size_t idx = 0;
  const std::size_t n = knots_.size();
  for (; idx < n && knots_[idx].x <= 0.0; ++idx) {
    const auto& kn = knots_[idx];
    const long double wgt = weight[kn.pair];
    value += wgt * (kn.jump - kn.slope_change * kn.x);
    slope += wgt * kn.slope_change;
  }
  std::vector<double> breakpoints{0.0};
  std::vector<PiecewiseLinearFunction::Segment> segments{{static_cast<double>(value), static_cast<double>(slope)}};
  long double prev = 0.0L;
  while (idx < n) {
    const long double x = knots_[idx].x;
    long double jump = 0.0L;
    long double dslope = 0.0L;
    bool active = false;
    for (; idx < n && knots_[idx].x == x; ++idx) {
      const long double wgt = weight[knots_[idx].pair];
      if (wgt == 0.0L) continue;
      active = true;
      jump += wgt * knots_[idx].jump;
      dslope += wgt * knots_[idx].slope_change;
    }
    if (!active) continue;
    value += slope * (x - prev) + jump;
    slope += dslope;
    prev = x;
    // Knots closer than double resolution share one breakpoint.
    const auto xd = static_cast<double>(x);
    if (xd >= 1.0) break;
    if (xd > breakpoints.back()) {
      breakpoints.push_back(xd);
    } else {
      segments.pop_back();
    }
    segments.push_back({static_cast<double>(value), static_cast<double>(slope)});
  }
  breakpoints.push_back(1.0);
  return PiecewiseLinearFunction(std::move(breakpoints), std::move(segments));
}

std::vector<long double> DerivativeOperator::sweep_cells(std::span<const double> levels, std::size_t count,
                                                         long double& sup) const {
  const auto weight = pair_weights(levels);
  long double value = 0.0L;
  long double slope = 0.0L;
  std::size_t idx = 0;
  const std::size_t n = knots_.size();
  for (; idx < n && knots_[idx].x <= 0.0L; ++idx) {
    const auto& kn = knots_[idx];
    const long double wgt = weight[kn.pair];
    value += wgt * (kn.jump - kn.slope_change * kn.x);
    slope += wgt * kn.slope_change;
  }
  std::vector<long double> acc(count, 0.0L);
  sup = std::abs(value);
  long double prev = 0.0L;
  std::size_t cell = 0;
  auto cell_right = grid_point<long double>(1, cells_);
  const auto limit = grid_point<long double>(count, cells_);
  // Integrates the current linear piece from prev to x, splitting at cell edges.
  const auto advance_to = [&](long double x) {
    while (prev < x) {
      const long double stop = std::min(x, cell_right);
      const long double len = stop - prev;
      acc[cell] += (value + 0.5L * slope * len) * len;
      value += slope * len;
      prev = stop;
      if (stop == cell_right) {
        if (cell + 1 == count) break;
        ++cell;
        cell_right = grid_point<long double>(cell + 1, cells_);
      }
    }
    sup = std::max(sup, std::abs(value));
  };
  while (idx < n && knots_[idx].x < limit) {
    const long double x = knots_[idx].x;
    long double jump = 0.0L;
    long double dslope = 0.0L;
    bool active = false;
    for (; idx < n && knots_[idx].x == x; ++idx) {
      const long double wgt = weight[knots_[idx].pair];
      if (wgt == 0.0L) continue;
      active = true;
      jump += wgt * knots_[idx].jump;
      dslope += wgt * knots_[idx].slope_change;
    }
    if (!active) continue;
    advance_to(x);
    value += jump;
    slope += dslope;
    sup = std::max(sup, std::abs(value));
  }
  advance_to(limit);
  for (auto& a : acc) a *= static_cast<long double>(cells_);
  return acc;
}

std::vector<double> DerivativeOperator::cell_rates(const PiecewiseConstantDensity& f, double* sup_norm) const {
  if (f.cell_count() != cells_) throw std::invalid_argument("DerivativeOperator: density grid does not match");
  // The left cells come from a sweep of f and the right cells from a sweep of
  // its mirror image, so the rates of a reflected density are the exact
  // reflection of the rates.
  const std::size_t right = cells_ / 2;
  const std::size_t left = cells_ - right;
  long double sup_left = 0.0L;
  long double sup_right = 0.0L;
  const auto forward = sweep_cells(f.levels(), left, sup_left);
  std::vector<double> mirrored(f.levels().rbegin(), f.levels().rend());
  const auto backward = sweep_cells(mirrored, right, sup_right);
  std::vector<double> rates(cells_);
  for (std::size_t c = 0; c < left; ++c) rates[c] = static_cast<double>(forward[c]);
  for (std::size_t c = 0; c < right; ++c) rates[cells_ - 1 - c] = static_cast<double>(backward[c]);
  if (sup_norm != nullptr) *sup_norm = static_cast<double>(std::max(sup_left, sup_right));
  return rates;
}

}  // namespace bcm
