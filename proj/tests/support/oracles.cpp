#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

namespace {

double level_at(const std::vector<double>& levels, double z) {
  if (!(z >= 0.0 && z < 1.0)) return 0.0;
  const auto n = levels.size();
  return levels[std::min(n - 1, static_cast<std::size_t>(z * static_cast<double>(n)))];
}

// Integral over [lo, hi] of a function that is constant between the given
// breakpoints, evaluated at sub-interval midpoints.
template <class F>
double piecewise_integral(double lo, double hi, std::vector<double> cuts, F g) {
  if (!(hi > lo)) return 0.0;
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = std::max(lo, cuts[k]);
    const double b = std::min(hi, cuts[k + 1]);
    if (b > a) acc += (b - a) * g(0.5 * (a + b));
  }
  return acc;
}

double loss_term(const std::vector<double>& levels, double delta, double x) {
  return 2.0 * level_at(levels, x) * (density_cdf(levels, x + delta) - density_cdf(levels, x - delta));
}

}  // namespace

double loss_kernel(double x, double xi, double xj, double delta) {
  if (x < xi) return 0.0;
  return std::clamp(x + delta - xj, 0.0, 2.0 * delta);
}

double gain_kernel(double x, double xi, double xj, double delta, double w) {
  const double lo = std::max(-delta, (xi - x) / w);
  const double hi = std::min(delta, (x - xj) / (1.0 - w));
  return std::max(0.0, hi - lo);
}

double density_cdf(const std::vector<double>& levels, double x) {
  const double n = static_cast<double>(levels.size());
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double acc = 0.0;
  for (std::size_t c = 0; c < levels.size(); ++c) {
    const double left = static_cast<double>(c) / n;
    const double right = static_cast<double>(c + 1) / n;
    if (x <= left) break;
    acc += levels[c] * (std::min(x, right) - left);
  }
  return acc;
}

double pointwise_derivative(const std::vector<double>& levels, double delta, double w, double x) {
  const double n = static_cast<double>(levels.size());
  std::vector<double> cuts;
  for (std::size_t k = 0; k <= levels.size(); ++k) {
    const double g = static_cast<double>(k) / n;
    cuts.push_back(g);
    cuts.push_back((x - w * g) / (1.0 - w));
  }
  const double gain = piecewise_integral(std::max(0.0, x - w * delta), std::min(1.0, x + w * delta), cuts, [&](double y) {
    return level_at(levels, (x - (1.0 - w) * y) / w) * level_at(levels, y);
  });
  return 2.0 / w * gain - loss_term(levels, delta, x);
}

double boltzmann_derivative(const std::vector<double>& levels, double delta, double w, double x) {
  const double n = static_cast<double>(levels.size());
  const double s = 2.0 * w - 1.0;
  std::vector<double> cuts;
  for (std::size_t k = 0; k <= levels.size(); ++k) {
    const double g = static_cast<double>(k) / n;
    cuts.push_back((w * x - s * g) / (1.0 - w));
    cuts.push_back((s * g + (1.0 - w) * x) / w);
  }
  const double a = x - delta * s;
  const double b = x + delta * s;
  const double gain = piecewise_integral(std::min(a, b), std::max(a, b), cuts, [&](double y) {
    return level_at(levels, (w * x - (1.0 - w) * y) / s) * level_at(levels, (w * y - (1.0 - w) * x) / s);
  });
  return 2.0 / std::abs(s) * gain - loss_term(levels, delta, x);
}

double clipped_area(double x0, double x1, double y0, double y1, const std::vector<HalfPlane>& planes) {
  std::vector<std::pair<double, double>> poly{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  for (const auto& p : planes) {
    std::vector<std::pair<double, double>> next;
    const auto side = [&](const std::pair<double, double>& v) { return p.c - (p.a * v.first + p.b * v.second); };
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const auto& u = poly[k];
      const auto& v = poly[(k + 1) % poly.size()];
      const double su = side(u);
      const double sv = side(v);
      if (su >= 0.0) next.push_back(u);
      if ((su >= 0.0) != (sv >= 0.0)) {
        const double t = su / (su - sv);
        next.push_back({u.first + t * (v.first - u.first), u.second + t * (v.second - u.second)});
      }
    }
    poly = std::move(next);
    if (poly.size() < 3) return 0.0;
  }
  double area = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const auto& u = poly[k];
    const auto& v = poly[(k + 1) % poly.size()];
    area += u.first * v.second - v.first * u.second;
  }
  return 0.5 * std::abs(area);
}

double window_average_derivative(const std::vector<double>& levels, double delta, double w, double lo, double hi) {
  const auto n = levels.size();
  const double h = 1.0 / static_cast<double>(n);
  const std::vector<HalfPlane> band{{1.0, -1.0, delta}, {-1.0, 1.0, delta}};
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double weight = levels[i] * levels[j];
      if (weight == 0.0) continue;
      const double x0 = static_cast<double>(i) * h;
      const double y0 = static_cast<double>(j) * h;
      auto gain = band;
      gain.push_back({-w, -(1.0 - w), -lo});
      gain.push_back({w, 1.0 - w, hi});
      auto loss = band;
      loss.push_back({-1.0, 0.0, -lo});
      loss.push_back({1.0, 0.0, hi});
      acc += weight * (clipped_area(x0, x0 + h, y0, y0 + h, gain) - clipped_area(x0, x0 + h, y0, y0 + h, loss));
    }
  }
  return 2.0 * acc / (hi - lo);
}

}  // namespace oracle
