#include "bcm/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "bcm/io.hpp"

namespace bcm {

namespace {

double neumaier_sum(std::span<const double> values) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double grid_point(std::size_t k, std::size_t cells) {
  return k == cells ? 1.0 : static_cast<double>(k) / static_cast<double>(cells);
}

// (r^(n+1) - l^(n+1)) / (n+1) without cancellation.
double power_integral(double l, double r, int n) {
  double acc = 0.0;
  double rk = 1.0;
  for (int k = 0; k <= n; ++k) {
    acc += rk * std::pow(l, n - k);
    rk *= r;
  }
  return (r - l) * acc / (n + 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// PiecewiseConstantDensity

PiecewiseConstantDensity::PiecewiseConstantDensity(std::vector<double> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw std::invalid_argument("density needs at least one cell");
  for (std::size_t c = 0; c < levels_.size(); ++c) {
    if (!std::isfinite(levels_[c]) || levels_[c] < 0.0) {
      throw std::invalid_argument("density level " + std::to_string(c) + " is negative or not finite");
    }
  }
  const double m = mass();
  if (std::abs(m - 1.0) > kMassTolerance) {
    throw std::invalid_argument("density mass " + io::format_double(m) + " differs from 1");
  }
}

PiecewiseConstantDensity PiecewiseConstantDensity::normalized(std::vector<double> levels) {
  if (levels.empty()) throw std::invalid_argument("density needs at least one cell");
  for (double v : levels) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("density levels must be finite and nonnegative");
  }
  const double m = neumaier_sum(levels) / static_cast<double>(levels.size());
  if (!(m > 0.0)) throw std::invalid_argument("density has zero mass");
  for (double& v : levels) v /= m;
  return PiecewiseConstantDensity(std::move(levels));
}

PiecewiseConstantDensity PiecewiseConstantDensity::uniform(std::size_t cells) {
  return PiecewiseConstantDensity(std::vector<double>(cells, 1.0));
}

double PiecewiseConstantDensity::cell_left(std::size_t c) const { return grid_point(c, levels_.size()); }
double PiecewiseConstantDensity::cell_right(std::size_t c) const { return grid_point(c + 1, levels_.size()); }

double PiecewiseConstantDensity::mass() const {
  return neumaier_sum(levels_) / static_cast<double>(levels_.size());
}

double PiecewiseConstantDensity::max_level() const { return *std::max_element(levels_.begin(), levels_.end()); }

double PiecewiseConstantDensity::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const auto n = levels_.size();
  const auto c = std::min(n - 1, static_cast<std::size_t>(x * static_cast<double>(n)));
  double acc = 0.0;
  for (std::size_t k = 0; k < c; ++k) acc += levels_[k];
  return (acc + levels_[c] * (x - cell_left(c)) * static_cast<double>(n)) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// PiecewiseLinearFunction

PiecewiseLinearFunction::PiecewiseLinearFunction(std::vector<double> breakpoints, std::vector<Segment> segments)
    : breakpoints_(std::move(breakpoints)), segments_(std::move(segments)) {
  if (breakpoints_.size() < 2 || breakpoints_.size() != segments_.size() + 1) {
    throw std::invalid_argument("piecewise-linear function needs one more breakpoint than segments");
  }
  if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0) {
    throw std::invalid_argument("piecewise-linear breakpoints must start at 0 and end at 1");
  }
  for (std::size_t k = 1; k < breakpoints_.size(); ++k) {
    if (!(breakpoints_[k] > breakpoints_[k - 1])) {
      throw std::invalid_argument("piecewise-linear breakpoints must be strictly increasing");
    }
  }
  for (const auto& s : segments_) {
    if (!std::isfinite(s.value_at_left) || !std::isfinite(s.slope)) {
      throw std::invalid_argument("piecewise-linear segment is not finite");
    }
  }
}

double PiecewiseLinearFunction::operator()(double x) const {
  if (x < 0.0 || x > 1.0) return 0.0;
  if (x == 1.0) return left_limit(1.0);
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  const auto k = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return segments_[k].value_at_left + segments_[k].slope * (x - breakpoints_[k]);
}

double PiecewiseLinearFunction::left_limit(double x) const {
  if (x <= 0.0 || x > 1.0) return 0.0;
  const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
  const auto k = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return segments_[k].value_at_left + segments_[k].slope * (x - breakpoints_[k]);
}

double PiecewiseLinearFunction::integral(double a, double b) const {
  a = std::max(a, 0.0);
  b = std::min(b, 1.0);
  if (!(b > a)) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const double s = std::max(a, breakpoints_[k]);
    const double e = std::min(b, breakpoints_[k + 1]);
    if (e <= s) continue;
    const auto& seg = segments_[k];
    const double vs = seg.value_at_left + seg.slope * (s - breakpoints_[k]);
    const double ve = seg.value_at_left + seg.slope * (e - breakpoints_[k]);
    acc += 0.5 * (vs + ve) * (e - s);
  }
  return acc;
}

double PiecewiseLinearFunction::moment_integral(int n) const {
  if (n < 0 || n > 6) throw std::invalid_argument("moment_integral supports orders 0..6");
  // 4-point Gauss-Legendre integrates polynomials up to degree 7 exactly.
  static constexpr std::array<double, 4> nodes{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                               0.8611363115940526};
  static constexpr std::array<double, 4> weights{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                                 0.3478548451374538};
  double acc = 0.0;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const double l = breakpoints_[k];
    const double r = breakpoints_[k + 1];
    const double half = 0.5 * (r - l);
    const double mid = 0.5 * (r + l);
    double part = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double x = mid + half * nodes[q];
      part += weights[q] * std::pow(x, n) * (segments_[k].value_at_left + segments_[k].slope * (x - l));
    }
    acc += half * part;
  }
  return acc;
}

double PiecewiseLinearFunction::sup_norm() const {
  double best = 0.0;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const auto& seg = segments_[k];
    const double right = seg.value_at_left + seg.slope * (breakpoints_[k + 1] - breakpoints_[k]);
    best = std::max({best, std::abs(seg.value_at_left), std::abs(right)});
  }
  return best;
}

std::vector<double> PiecewiseLinearFunction::cell_averages(std::size_t cells) const {
  std::vector<double> out(cells, 0.0);
  const double inv_width = static_cast<double>(cells);
  std::size_t k = 0;
  const std::size_t nseg = segments_.size();
  for (std::size_t c = 0; c < cells; ++c) {
    const double l = grid_point(c, cells);
    const double r = grid_point(c + 1, cells);
    while (k < nseg && breakpoints_[k + 1] <= l) ++k;
    double acc = 0.0;
    std::size_t j = k;
    while (j < nseg && breakpoints_[j] < r) {
      const double s = std::max(breakpoints_[j], l);
      const double e = std::min(breakpoints_[j + 1], r);
      if (e > s) {
        const auto& seg = segments_[j];
        const double vs = seg.value_at_left + seg.slope * (s - breakpoints_[j]);
        const double ve = seg.value_at_left + seg.slope * (e - breakpoints_[j]);
        acc += 0.5 * (vs + ve) * (e - s);
      }
      if (breakpoints_[j + 1] > r) break;
      ++j;
    }
    k = j;
    out[c] = acc * inv_width;
  }
  return out;
}

// ---------------------------------------------------------------------------
// EmpiricalMeasure and moments

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("empirical measure needs at least one atom");
  for (double x : atoms_) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("empirical atom outside [0,1]");
  }
  std::sort(atoms_.begin(), atoms_.end());
}

MomentSummary moments(const PiecewiseConstantDensity& density, int max_order) {
  if (max_order < 2) throw std::invalid_argument("moments: max_order must be at least 2");
  MomentSummary out;
  out.raw.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
  const auto cells = density.cell_count();
  std::vector<double> terms(cells);
  for (int n = 0; n <= max_order; ++n) {
    for (std::size_t c = 0; c < cells; ++c) {
      terms[c] = density.level(c) * power_integral(density.cell_left(c), density.cell_right(c), n);
    }
    out.raw[static_cast<std::size_t>(n)] = neumaier_sum(terms);
  }
  out.mean = out.raw[1];
  for (std::size_t c = 0; c < cells; ++c) {
    const double l = density.cell_left(c) - out.mean;
    const double r = density.cell_right(c) - out.mean;
    terms[c] = density.level(c) * (r - l) * (r * r + r * l + l * l) / 3.0;
  }
  out.std_dev = std::sqrt(std::max(0.0, neumaier_sum(terms)));
  std::size_t first = cells;
  std::size_t last = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    if (density.level(c) > 0.0) {
      first = std::min(first, c);
      last = c;
    }
  }
  out.ess_inf = density.cell_left(first);
  out.ess_sup = density.cell_right(last);
  return out;
}

MomentSummary moments(std::span<const double> atoms, int max_order) {
  if (max_order < 2) throw std::invalid_argument("moments: max_order must be at least 2");
  if (atoms.empty()) throw std::invalid_argument("moments: empty atom set");
  MomentSummary out;
  out.raw.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
  const double n = static_cast<double>(atoms.size());
  std::vector<double> terms(atoms.size());
  for (int k = 0; k <= max_order; ++k) {
    for (std::size_t i = 0; i < atoms.size(); ++i) terms[i] = std::pow(atoms[i], k);
    out.raw[static_cast<std::size_t>(k)] = neumaier_sum(terms) / n;
  }
  out.mean = out.raw[1];
  for (std::size_t i = 0; i < atoms.size(); ++i) terms[i] = (atoms[i] - out.mean) * (atoms[i] - out.mean);
  out.std_dev = std::sqrt(neumaier_sum(terms) / n);
  const auto [lo, hi] = std::minmax_element(atoms.begin(), atoms.end());
  out.ess_inf = *lo;
  out.ess_sup = *hi;
  return out;
}

MomentSummary moments(const EmpiricalMeasure& measure, int max_order) { return moments(measure.atoms(), max_order); }

double mean_abs_deviation(const PiecewiseConstantDensity& density, double center) {
  std::vector<double> terms(density.cell_count());
  for (std::size_t c = 0; c < density.cell_count(); ++c) {
    const double l = density.cell_left(c);
    const double r = density.cell_right(c);
    double integral;
    if (center <= l) {
      integral = (r - l) * ((r - center) + (l - center)) / 2.0;
    } else if (center >= r) {
      integral = (r - l) * ((center - l) + (center - r)) / 2.0;
    } else {
      integral = ((center - l) * (center - l) + (r - center) * (r - center)) / 2.0;
    }
    terms[c] = density.level(c) * integral;
  }
  return neumaier_sum(terms);
}

// ---------------------------------------------------------------------------
// CDFs and distances

Cdf::Cdf(const PiecewiseConstantDensity& density) {
  const auto cells = density.cell_count();
  knots_.reserve(cells + 1);
  double acc = 0.0;
  knots_.push_back({0.0, 0.0, 0.0});
  for (std::size_t c = 0; c < cells; ++c) {
    acc += density.level(c) * density.cell_width();
    knots_.push_back({density.cell_right(c), acc, acc});
  }
  knots_.back().above = 1.0;
}

Cdf::Cdf(const EmpiricalMeasure& measure) {
  const auto atoms = measure.atoms();
  const double n = static_cast<double>(atoms.size());
  std::size_t i = 0;
  while (i < atoms.size()) {
    std::size_t j = i;
    while (j < atoms.size() && atoms[j] == atoms[i]) ++j;
    knots_.push_back({atoms[i], static_cast<double>(i) / n, static_cast<double>(j) / n});
    i = j;
  }
  knots_.back().above = 1.0;
}

double Cdf::operator()(double x) const {
  if (x < knots_.front().x) return 0.0;
  if (x >= knots_.back().x) return 1.0;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x, [](double v, const Knot& k) { return v < k.x; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  if (x == lo.x) return lo.above;
  return lo.above + (hi.below - lo.above) * (x - lo.x) / (hi.x - lo.x);
}

double Cdf::left_limit(double x) const {
  if (x <= knots_.front().x) return 0.0;
  if (x > knots_.back().x) return 1.0;
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), x, [](const Knot& k, double v) { return k.x < v; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  if (x == hi.x) return hi.below;
  return lo.above + (hi.below - lo.above) * (x - lo.x) / (hi.x - lo.x);
}

namespace {

std::vector<double> merged_points(const Cdf& a, const Cdf& b) {
  std::vector<double> xs{0.0, 1.0};
  for (const auto& k : a.knots()) xs.push_back(k.x);
  for (const auto& k : b.knots()) xs.push_back(k.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace

double kolmogorov_distance(const Cdf& a, const Cdf& b) {
  double best = 0.0;
  for (double x : merged_points(a, b)) {
    best = std::max({best, std::abs(a(x) - b(x)), std::abs(a.left_limit(x) - b.left_limit(x))});
  }
  return best;
}

double wasserstein1_distance(const Cdf& a, const Cdf& b) {
  const auto xs = merged_points(a, b);
  std::vector<double> pieces;
  pieces.reserve(xs.size());
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double p = xs[k];
    const double q = xs[k + 1];
    const double d0 = a(p) - b(p);
    const double d1 = a.left_limit(q) - b.left_limit(q);
    const double len = q - p;
    if (d0 * d1 >= 0.0) {
      pieces.push_back(0.5 * (std::abs(d0) + std::abs(d1)) * len);
    } else {
      pieces.push_back((d0 * d0 + d1 * d1) / (2.0 * (std::abs(d0) + std::abs(d1))) * len);
    }
  }
  return neumaier_sum(pieces);
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<double> sample(const PiecewiseConstantDensity& density, std::size_t n, Rng& rng) {
  const auto cells = density.cell_count();
  std::vector<double> cum(cells + 1, 0.0);
  for (std::size_t c = 0; c < cells; ++c) cum[c + 1] = cum[c] + density.level(c) * density.cell_width();
  std::size_t last_positive = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    if (density.level(c) > 0.0) last_positive = c;
  }
  std::vector<double> out(n);
  for (auto& x : out) {
    const double u = rng.uniform01() * cum[cells];
    auto c = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    c = c == 0 ? 0 : c - 1;
    if (c >= cells || density.level(c) <= 0.0) c = last_positive;
    const double l = density.cell_left(c);
    const double r = density.cell_right(c);
    x = std::clamp(l + (u - cum[c]) / density.level(c), l, r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

void write_density_csv(std::ostream& out, const PiecewiseConstantDensity& density) {
  out << "x_left,x_right,level\n";
  for (std::size_t c = 0; c < density.cell_count(); ++c) {
    out << io::format_double(density.cell_left(c)) << ',' << io::format_double(density.cell_right(c)) << ','
        << io::format_double(density.level(c)) << '\n';
  }
}

PiecewiseConstantDensity read_density_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || io::trim(line) != "x_left,x_right,level") {
    throw std::runtime_error("density CSV must start with header x_left,x_right,level");
  }
  std::vector<double> lefts;
  std::vector<double> levels;
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    const auto fields = io::split(line, ',');
    if (fields.size() != 3) throw std::runtime_error("density CSV row needs 3 fields: " + line);
    lefts.push_back(io::parse_double(fields[0]));
    levels.push_back(io::parse_double(fields[2]));
  }
  if (levels.empty()) throw std::runtime_error("density CSV has no rows");
  for (std::size_t c = 0; c < lefts.size(); ++c) {
    if (std::abs(lefts[c] - grid_point(c, levels.size())) > 1e-9) {
      throw std::runtime_error("density CSV cells must form a uniform grid on [0,1]");
    }
  }
  return PiecewiseConstantDensity(std::move(levels));
}

void write_atoms_csv(std::ostream& out, std::span<const double> atoms) {
  out << "atom\n";
  for (double x : atoms) out << io::format_double(x) << '\n';
}

std::vector<double> read_atoms_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || io::trim(line) != "atom") throw std::runtime_error("atom CSV must start with header atom");
  std::vector<double> atoms;
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    atoms.push_back(io::parse_double(line));
  }
  return atoms;
}

}  // namespace bcm
