#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bcm/measures.hpp"
#include "bcm/rng.hpp"

namespace bcm {

/// Uniform density of the given mass on [center - width/2, center + width/2],
/// shifted to lie inside [0, 1].
struct Block {
  double center = 0.5;
  double mass = 1.0;
  double width = 0.1;
};

/// Exact cell averages of the Beta(a, b) density.
PiecewiseConstantDensity beta_density(double a, double b, std::size_t cells);

/// Exact cell averages of a union of uniform blocks. Masses must sum to 1
/// within 1e-9 and widths must be positive.
PiecewiseConstantDensity blocks_density(const std::vector<Block>& blocks, std::size_t cells);

/// Masses (1-alpha)/2, alpha, (1-alpha)/2 at 0, 1/2 and 1, each spread over
/// one cell width. With an even cell count the middle block straddles the
/// two central cells.
std::vector<Block> extremist_blocks(double alpha, std::size_t cells);
PiecewiseConstantDensity extremists_density(double alpha, std::size_t cells);

/// Parsed initial-condition specification.
///
/// Accepted forms: `uniform`, `beta(a,b)`, `blocks([{center,mass,width},...])`
/// (JSON array; keys may be unquoted), `extremists(alpha)` and `csv(path)`.
/// A CSV file with header `x_left,x_right,level` is a density; a CSV with
/// header `atom` is a list of opinions.
class InitialCondition {
 public:
  enum class Kind { uniform, beta, blocks, extremists, density_csv, atoms_csv };

  /// Throws std::invalid_argument on malformed specs or unreadable files.
  static InitialCondition parse(const std::string& spec);

  Kind kind() const { return kind_; }
  const std::string& spec() const { return spec_; }
  double beta_a() const { return a_; }
  double beta_b() const { return b_; }
  double alpha() const { return a_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<double>& atoms() const { return atoms_; }

  /// Density on `cells` cells. Atom lists are binned into a histogram. A CSV
  /// density must already have `cells` cells.
  PiecewiseConstantDensity density(std::size_t cells) const;

  /// n i.i.d. opinions drawn from the exact law (Beta and blocks are sampled
  /// without discretization). An atom list is returned as is and n must then
  /// be 0 or equal its size.
  std::vector<double> sample(std::size_t n, Rng& rng) const;

 private:
  Kind kind_ = Kind::uniform;
  std::string spec_ = "uniform";
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<Block> blocks_;
  std::vector<double> atoms_;
  std::vector<double> levels_;
};

}  // namespace bcm
