#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bcm/consensus.hpp"
#include "bcm/kinetic_solver.hpp"
#include "bcm/measures.hpp"
#include "bcm/params.hpp"

namespace bcm {

enum class BoundStatus { checked, not_applicable };

/// Outcome of checking one consensus criterion against an observed run.
struct BoundVerdict {
  std::string name;
  /// Each named hypothesis condition and whether it holds.
  std::vector<std::pair<std::string, bool>> hypotheses;
  BoundStatus status = BoundStatus::checked;
  /// "total", "c != 2", "c <= n-1", "envelope holds", ...
  std::string predicted;
  std::string observed;
  /// True unless every hypothesis holds and the observation contradicts the
  /// prediction.
  bool agreement = true;
  std::vector<std::pair<std::string, double>> values;

  bool hypothesis_holds() const;
  /// One-line JSON object.
  std::string to_json_line() const;
};

/// Convex h(x) = |x - center|^power with power >= 1.
struct ConvexH {
  double center = 0.5;
  double power = 1.0;

  double operator()(double x) const;
  /// Exact integral of h against the density.
  double integral(const PiecewiseConstantDensity& density) const;
  /// Parses `abs(c)` or `pow(c,p)`.
  static ConvexH parse(const std::string& text);
};

/// Diameter of the support below delta => total consensus.
BoundVerdict diameter_bound(const PiecewiseConstantDensity& m0, const ModelParams& params,
                            const ConsensusReport& observed);

/// Uniform m0 and delta > 1/2 => total consensus.
BoundVerdict uniform_half_bound(const PiecewiseConstantDensity& m0, const ModelParams& params,
                                const ConsensusReport& observed);

/// Symmetric m0 and delta > 2 <|x - 1/2|, m0> => the limit does not have two
/// components; with delta >= 1/2 it is a total consensus.
BoundVerdict symmetric_h_bound(const PiecewiseConstantDensity& m0, const ModelParams& params,
                               const ConsensusReport& observed);

/// General criterion: for convex h, n >= 2 and a user-supplied q that is a
/// strict lower bound of <h, nu> over the partial consensuses nu with n
/// components (symmetric ones if `symmetric`), <h, m0> <= q => c <= n - 1.
/// The membership of q is the caller's claim and is not verified.
BoundVerdict general_h_bound(const PiecewiseConstantDensity& m0, const ModelParams& params, const ConvexH& h,
                             int n, double q, bool symmetric, const ConsensusReport& observed);

/// delta >= 1/2, 1 - delta <= mu0 <= delta and
/// <|x - mu0|, m0> < (2/delta) min{mu0 (delta - mu0), (1 - mu0)(delta - 1 + mu0)}
/// => total consensus.
BoundVerdict mean_deviation_bound(const PiecewiseConstantDensity& m0, const ModelParams& params,
                                  const ConsensusReport& observed);

/// Extremists at 0 and 1 with mass (1-alpha)/2 each and alpha at 1/2:
/// delta > 1 - alpha (alpha <= 1/2) or delta > 1/2 (alpha >= 1/2) => total.
BoundVerdict extremist_bound(double alpha, const ModelParams& params, const ConsensusReport& observed);

/// sigma(t) >= sigma(0) exp(-4 w (1-w) t) - slack at every diagnostics row.
BoundVerdict sigma_envelope_bound(const std::vector<DiagnosticsRow>& diagnostics, const ModelParams& params,
                                  double slack = 1e-3);

/// max level M(t) <= exp((2/w + 2/(1-w)) t) (M(0) + 4) - 4 at every row.
BoundVerdict sup_norm_bound(const std::vector<DiagnosticsRow>& diagnostics, const ModelParams& params);

struct BoundsInput {
  PiecewiseConstantDensity m0;
  SolverConfig cfg;
  double mass_threshold = 0.01;
  /// Set for extremist initial conditions.
  std::optional<double> alpha;
  /// Optional general criterion.
  std::optional<ConvexH> h;
  int n = 2;
  double q = 0.0;
  bool symmetric_q = false;
};

struct BoundsReport {
  ConsensusReport observed;
  std::vector<BoundVerdict> verdicts;

  bool all_agree() const;
};

/// Solves once and evaluates every criterion (not applicable ones included).
BoundsReport evaluate_bounds(const BoundsInput& input);

}  // namespace bcm
