#include "bcm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>
#include <stdexcept>

#include "bcm/analysis.hpp"
#include "bcm/io.hpp"
#include "json.hpp"

namespace bcm {

namespace {

bool is_resolved(const ConsensusReport& r) { return r.classification.kind != Classification::Kind::unresolved; }

bool observed_total(const ConsensusReport& r) { return r.classification.is_total(); }

bool is_symmetric(const PiecewiseConstantDensity& f) {
  const auto n = f.cell_count();
  const double tol = 1e-12 * std::max(1.0, f.max_level());
  for (std::size_t c = 0; c < n / 2; ++c) {
    if (std::abs(f.level(c) - f.level(n - 1 - c)) > tol) return false;
  }
  return true;
}

bool is_uniform(const PiecewiseConstantDensity& f) {
  return std::all_of(f.levels().begin(), f.levels().end(), [](double v) { return std::abs(v - 1.0) <= 1e-12; });
}

double support_diameter(const PiecewiseConstantDensity& f) {
  std::size_t first = f.cell_count();
  std::size_t last = 0;
  for (std::size_t c = 0; c < f.cell_count(); ++c) {
    if (f.level(c) > 0.0) {
      first = std::min(first, c);
      last = c;
    }
  }
  return first == f.cell_count() ? 0.0 : f.cell_right(last) - f.cell_left(first);
}

void settle(BoundVerdict& v, bool predicted_holds) {
  if (v.hypothesis_holds()) v.agreement = predicted_holds;
}

BoundVerdict total_verdict(std::string name, std::vector<std::pair<std::string, bool>> hypotheses,
                           const ConsensusReport& observed) {
  BoundVerdict v;
  v.name = std::move(name);
  v.hypotheses = std::move(hypotheses);
  v.predicted = "total";
  v.observed = observed.classification.to_string();
  settle(v, observed_total(observed));
  return v;
}

}  // namespace

bool BoundVerdict::hypothesis_holds() const {
  return status == BoundStatus::checked &&
         std::all_of(hypotheses.begin(), hypotheses.end(), [](const auto& h) { return h.second; });
}

std::string BoundVerdict::to_json_line() const {
  nlohmann::ordered_json j;
  j["bound"] = name;
  j["status"] = status == BoundStatus::checked ? "checked" : "not_applicable";
  auto hyp = nlohmann::ordered_json::object();
  for (const auto& [k, ok] : hypotheses) hyp[k] = ok;
  j["hypotheses"] = hyp;
  j["hypothesis_holds"] = hypothesis_holds();
  j["predicted"] = predicted;
  j["observed"] = observed;
  j["agreement"] = agreement;
  auto vals = nlohmann::ordered_json::object();
  for (const auto& [k, x] : values) vals[k] = std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
  j["values"] = vals;
  return j.dump();
}

double ConvexH::operator()(double x) const { return std::pow(std::abs(x - center), power); }

double ConvexH::integral(const PiecewiseConstantDensity& density) const {
  const auto g = [&](double x) {
    const double d = x - center;
    return std::copysign(std::pow(std::abs(d), power + 1.0), d) / (power + 1.0);
  };
  double acc = 0.0;
  for (std::size_t c = 0; c < density.cell_count(); ++c) {
    if (density.level(c) == 0.0) continue;
    acc += density.level(c) * (g(density.cell_right(c)) - g(density.cell_left(c)));
  }
  return acc;
}

ConvexH ConvexH::parse(const std::string& text) {
  static const std::regex abs_form(R"(\s*abs\(\s*([^,\s)]+)\s*\)\s*)");
  static const std::regex pow_form(R"(\s*pow\(\s*([^,\s]+)\s*,\s*([^,\s)]+)\s*\)\s*)");
  std::smatch m;
  ConvexH h;
  if (std::regex_match(text, m, abs_form)) {
    h.center = io::parse_double(m[1].str());
  } else if (std::regex_match(text, m, pow_form)) {
    h.center = io::parse_double(m[1].str());
    h.power = io::parse_double(m[2].str());
  } else {
    throw std::invalid_argument("h must be abs(c) or pow(c,p), got '" + text + "'");
  }
  if (!(h.power >= 1.0)) throw std::invalid_argument("h: power must be at least 1 for convexity");
  return h;
}

BoundVerdict diameter_bound(const PiecewiseConstantDensity& m0, const ModelParams& params,
                            const ConsensusReport& observed) {
  const double diam = support_diameter(m0);
  auto v = total_verdict("diameter", {{"diameter < delta", diam < params.delta}}, observed);
  v.values = {{"diameter", diam}, {"delta", params.delta}};
  return v;
}

BoundVerdict uniform_half_bound(const PiecewiseConstantDensity& m0, const ModelParams& params,
                                const ConsensusReport& observed) {
  auto v = total_verdict("uniform_half", {{"m0 uniform", is_uniform(m0)}, {"delta > 1/2", params.delta > 0.5}},
                         observed);
  if (!is_uniform(m0)) v.status = BoundStatus::not_applicable;
  v.values = {{"delta", params.delta}};
  return v;
}

BoundVerdict symmetric_h_bound(const PiecewiseConstantDensity& m0, const ModelParams& params,
                               const ConsensusReport& observed) {
  const double dev = mean_abs_deviation(m0, 0.5);
  BoundVerdict v;
  v.name = "symmetric_h";
  const bool sym = is_symmetric(m0);
  v.hypotheses = {{"m0 symmetric", sym}, {"delta > 2 <|x-1/2|, m0>", params.delta > 2.0 * dev}};
  if (!sym) v.status = BoundStatus::not_applicable;
  // Three components need a span above 2 delta, so delta >= 1/2 leaves only total.
  const bool strong = params.delta >= 0.5;
  v.predicted = strong ? "total" : "c != 2";
  v.observed = observed.classification.to_string();
  const bool ok = strong ? observed_total(observed) : is_resolved(observed) && observed.components.size() != 2;
  settle(v, ok);
  v.values = {{"mean_abs_deviation", dev}, {"delta", params.delta}};
  return v;
}

BoundVerdict general_h_bound(const PiecewiseConstantDensity& m0, const ModelParams& params, const ConvexH& h,
                             int n, double q, bool symmetric, const ConsensusReport& observed) {
  if (n < 2) throw std::invalid_argument("general_h_bound: n must be at least 2");
  if (!(q >= 0.0)) throw std::invalid_argument("general_h_bound: q must be nonnegative");
  (void)params;
  const double hm = h.integral(m0);
  BoundVerdict v;
  v.name = symmetric ? "symmetric_h_user" : "general_h_user";
  if (symmetric) v.hypotheses.push_back({"m0 symmetric", is_symmetric(m0)});
  v.hypotheses.push_back({"<h, m0> <= q", hm <= q});
  if (symmetric && !is_symmetric(m0)) v.status = BoundStatus::not_applicable;
  v.predicted = "c <= " + std::to_string(n - 1);
  v.observed = observed.classification.to_string();
  settle(v, is_resolved(observed) && observed.components.size() <= static_cast<std::size_t>(n - 1));
  v.values = {{"h_m0", hm}, {"q", q}, {"n", static_cast<double>(n)}, {"h_center", h.center}, {"h_power", h.power}};
  return v;
}

BoundVerdict mean_deviation_bound(const PiecewiseConstantDensity& m0, const ModelParams& params,
                                  const ConsensusReport& observed) {
  const double d = params.delta;
  const double mu = moments(m0, 2).mean;
  const double dev = mean_abs_deviation(m0, mu);
  const double rhs = 2.0 / d * std::min(mu * (d - mu), (1.0 - mu) * (d - 1.0 + mu));
  auto v = total_verdict("mean_deviation",
                         {{"delta >= 1/2", d >= 0.5},
                          {"1 - delta <= mu0 <= delta", 1.0 - d <= mu && mu <= d},
                          {"<|x-mu0|, m0> < bound", dev < rhs}},
                         observed);
  v.values = {{"mu0", mu}, {"mean_abs_deviation", dev}, {"bound", rhs}, {"delta", d}};
  return v;
}

BoundVerdict extremist_bound(double alpha, const ModelParams& params, const ConsensusReport& observed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("extremist_bound: alpha must lie in [0, 1]");
  const double threshold = alpha <= 0.5 ? 1.0 - alpha : 0.5;
  auto v = total_verdict("extremist_cie", {{"delta > threshold(alpha)", params.delta > threshold}}, observed);
  v.values = {{"alpha", alpha}, {"threshold", threshold}, {"delta", params.delta}};
  return v;
}

BoundVerdict sigma_envelope_bound(const std::vector<DiagnosticsRow>& diagnostics, const ModelParams& params,
                                  double slack) {
  BoundVerdict v;
  v.name = "sigma_envelope";
  v.hypotheses = {{"trajectory available", !diagnostics.empty()}};
  v.predicted = "sigma(t) >= sigma(0) exp(-4w(1-w)t) - " + io::format_double(slack);
  if (diagnostics.empty()) {
    v.status = BoundStatus::not_applicable;
    return v;
  }
  const double s0 = diagnostics.front().sigma;
  const double rate = 4.0 * params.w * (1.0 - params.w);
  double margin = std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
  for (const auto& r : diagnostics) {
    const double m = r.sigma - (s0 * std::exp(-rate * r.t) - slack);
    if (m < margin) {
      margin = m;
      worst_t = r.t;
    }
  }
  v.agreement = margin >= 0.0;
  v.observed = v.agreement ? "holds" : "violated";
  v.values = {{"min_margin", margin}, {"at_t", worst_t}, {"slack", slack}};
  return v;
}

BoundVerdict sup_norm_bound(const std::vector<DiagnosticsRow>& diagnostics, const ModelParams& params) {
  BoundVerdict v;
  v.name = "sup_norm";
  v.hypotheses = {{"trajectory available", !diagnostics.empty()}};
  v.predicted = "M(t) <= exp((2/w + 2/(1-w)) t)(M(0) + 4) - 4";
  if (diagnostics.empty()) {
    v.status = BoundStatus::not_applicable;
    return v;
  }
  const double m0 = diagnostics.front().max_level;
  const double rate = 2.0 / params.w + 2.0 / (1.0 - params.w);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : diagnostics) {
    const double bound = std::exp(rate * r.t) * (m0 + 4.0) - 4.0;
    worst = std::max(worst, r.max_level - bound);
  }
  // Allow rounding in the levels themselves.
  v.agreement = worst <= 1e-9 * std::max(1.0, m0);
  v.observed = v.agreement ? "holds" : "violated";
  v.values = {{"max_excess", worst}};
  return v;
}

bool BoundsReport::all_agree() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const BoundVerdict& v) { return v.agreement; });
}

BoundsReport evaluate_bounds(const BoundsInput& input) {
  const auto result = KineticSolver(input.cfg).solve(input.m0);
  const auto& p = input.cfg.params;
  BoundsReport out;
  out.observed = classify(result.final_density, p, input.mass_threshold);
  out.observed.steps = input.cfg.step_count();
  out.verdicts.push_back(diameter_bound(input.m0, p, out.observed));
  out.verdicts.push_back(uniform_half_bound(input.m0, p, out.observed));
  out.verdicts.push_back(symmetric_h_bound(input.m0, p, out.observed));
  out.verdicts.push_back(mean_deviation_bound(input.m0, p, out.observed));
  if (input.alpha) {
    out.verdicts.push_back(extremist_bound(*input.alpha, p, out.observed));
  } else {
    BoundVerdict v;
    v.name = "extremist_cie";
    v.status = BoundStatus::not_applicable;
    v.predicted = "total";
    v.observed = out.observed.classification.to_string();
    out.verdicts.push_back(v);
  }
  if (input.h) {
    out.verdicts.push_back(general_h_bound(input.m0, p, *input.h, input.n, input.q, input.symmetric_q, out.observed));
  }
  out.verdicts.push_back(sigma_envelope_bound(result.diagnostics, p));
  out.verdicts.push_back(sup_norm_bound(result.diagnostics, p));
  return out;
}

}  // namespace bcm
