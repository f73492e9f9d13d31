#include "bcm/initial_conditions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "bcm/io.hpp"
#include "json.hpp"

namespace bcm {

namespace {

double grid_point(std::size_t k, std::size_t cells) {
  return k == cells ? 1.0 : static_cast<double>(k) / static_cast<double>(cells);
}

std::pair<double, double> placed(const Block& b) {
  double lo = b.center - 0.5 * b.width;
  double hi = b.center + 0.5 * b.width;
  if (lo < 0.0) {
    hi -= lo;
    lo = 0.0;
  }
  if (hi > 1.0) {
    lo -= hi - 1.0;
    hi = 1.0;
  }
  return {std::max(lo, 0.0), hi};
}

void check_blocks(const std::vector<Block>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("blocks: need at least one block");
  double total = 0.0;
  for (const auto& b : blocks) {
    if (!(b.width > 0.0 && b.width <= 1.0)) throw std::invalid_argument("blocks: width must lie in (0, 1]");
    if (!(b.mass >= 0.0)) throw std::invalid_argument("blocks: mass must be nonnegative");
    if (!(b.center >= 0.0 && b.center <= 1.0)) throw std::invalid_argument("blocks: center must lie in [0, 1]");
    total += b.mass;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("blocks: masses sum to " + io::format_double(total) + ", expected 1");
  }
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

std::string call_argument(std::string_view spec, std::string_view name) {
  if (!starts_with(spec, name) || spec.size() < name.size() + 2 || spec[name.size()] != '(' || spec.back() != ')') {
    throw std::invalid_argument("malformed initial condition '" + std::string(spec) + "'");
  }
  return std::string(io::trim(spec.substr(name.size() + 1, spec.size() - name.size() - 2)));
}

void check_unit_interval(double alpha, const char* what) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

PiecewiseConstantDensity beta_density(double a, double b, std::size_t cells) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("beta: shape parameters must be positive");
  if (cells < 1) throw std::invalid_argument("beta: need at least one cell");
  std::vector<double> levels(cells);
  double prev = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    const double next = c + 1 == cells ? 1.0 : boost::math::ibeta(a, b, grid_point(c + 1, cells));
    levels[c] = std::max(0.0, next - prev) * static_cast<double>(cells);
    prev = next;
  }
  return PiecewiseConstantDensity::normalized(std::move(levels));
}

PiecewiseConstantDensity blocks_density(const std::vector<Block>& blocks, std::size_t cells) {
  check_blocks(blocks);
  if (cells < 1) throw std::invalid_argument("blocks: need at least one cell");
  std::vector<double> levels(cells, 0.0);
  const double n = static_cast<double>(cells);
  for (const auto& b : blocks) {
    if (b.mass == 0.0) continue;
    const auto [lo, hi] = placed(b);
    const double height = b.mass / (hi - lo);
    const auto first = std::min(cells - 1, static_cast<std::size_t>(lo * n));
    for (std::size_t c = first; c < cells && grid_point(c, cells) < hi; ++c) {
      const double overlap = std::min(hi, grid_point(c + 1, cells)) - std::max(lo, grid_point(c, cells));
      if (overlap > 0.0) levels[c] += height * overlap * n;
    }
  }
  return PiecewiseConstantDensity::normalized(std::move(levels));
}

std::vector<Block> extremist_blocks(double alpha, std::size_t cells) {
  check_unit_interval(alpha, "alpha");
  const double width = 1.0 / static_cast<double>(cells);
  return {{0.0, 0.5 * (1.0 - alpha), width}, {0.5, alpha, width}, {1.0, 0.5 * (1.0 - alpha), width}};
}

PiecewiseConstantDensity extremists_density(double alpha, std::size_t cells) {
  return blocks_density(extremist_blocks(alpha, cells), cells);
}

InitialCondition InitialCondition::parse(const std::string& text) {
  InitialCondition ic;
  const auto spec = io::trim(text);
  ic.spec_ = std::string(spec);
  if (spec == "uniform") {
    ic.kind_ = Kind::uniform;
  } else if (starts_with(spec, "beta")) {
    const auto args = io::split(call_argument(spec, "beta"), ',');
    if (args.size() != 2) throw std::invalid_argument("beta(a,b) takes two arguments");
    ic.kind_ = Kind::beta;
    ic.a_ = io::parse_double(args[0]);
    ic.b_ = io::parse_double(args[1]);
    if (!(ic.a_ > 0.0 && ic.b_ > 0.0)) throw std::invalid_argument("beta: shape parameters must be positive");
  } else if (starts_with(spec, "extremists")) {
    ic.kind_ = Kind::extremists;
    ic.a_ = io::parse_double(call_argument(spec, "extremists"));
    check_unit_interval(ic.a_, "alpha");
  } else if (starts_with(spec, "blocks")) {
    ic.kind_ = Kind::blocks;
    static const std::regex bare_key(R"(([\{,]\s*)([A-Za-z_]+)\s*:)");
    const auto body = std::regex_replace(call_argument(spec, "blocks"), bare_key, "$1\"$2\":");
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("blocks: ") + e.what());
    }
    if (!parsed.is_array()) throw std::invalid_argument("blocks: expected a JSON array");
    for (const auto& item : parsed) {
      if (!item.is_object() || !item.contains("center") || !item.contains("mass") || !item.contains("width")) {
        throw std::invalid_argument("blocks: each block needs center, mass and width");
      }
      ic.blocks_.push_back({item["center"].get<double>(), item["mass"].get<double>(), item["width"].get<double>()});
    }
    check_blocks(ic.blocks_);
  } else if (starts_with(spec, "csv")) {
    const auto path = call_argument(spec, "csv");
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("csv: cannot open '" + path + "'");
    std::string header;
    std::getline(in, header);
    in.seekg(0);
    try {
      if (io::trim(header) == "atom") {
        ic.kind_ = Kind::atoms_csv;
        ic.atoms_ = read_atoms_csv(in);
        EmpiricalMeasure check(ic.atoms_);
      } else {
        ic.kind_ = Kind::density_csv;
        const auto f = read_density_csv(in);
        ic.levels_.assign(f.levels().begin(), f.levels().end());
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument("csv '" + path + "': " + e.what());
    }
  } else {
    throw std::invalid_argument("unknown initial condition '" + ic.spec_ +
                                "' (expected uniform, beta(a,b), blocks([...]), extremists(alpha) or csv(path))");
  }
  return ic;
}

PiecewiseConstantDensity InitialCondition::density(std::size_t cells) const {
  switch (kind_) {
    case Kind::uniform:
      return PiecewiseConstantDensity::uniform(cells);
    case Kind::beta:
      return beta_density(a_, b_, cells);
    case Kind::blocks:
      return blocks_density(blocks_, cells);
    case Kind::extremists:
      return extremists_density(a_, cells);
    case Kind::density_csv:
      if (levels_.size() != cells) {
        throw std::invalid_argument("csv density has " + std::to_string(levels_.size()) + " cells, grid has " +
                                    std::to_string(cells));
      }
      return PiecewiseConstantDensity(levels_);
    case Kind::atoms_csv: {
      std::vector<double> levels(cells, 0.0);
      for (double x : atoms_) levels[std::min(cells - 1, static_cast<std::size_t>(x * static_cast<double>(cells)))] += 1.0;
      return PiecewiseConstantDensity::normalized(std::move(levels));
    }
  }
  throw std::logic_error("unhandled initial condition kind");
}

std::vector<double> InitialCondition::sample(std::size_t n, Rng& rng) const {
  std::vector<double> out;
  switch (kind_) {
    case Kind::uniform:
      out.resize(n);
      for (auto& x : out) x = rng.uniform01();
      return out;
    case Kind::beta:
      out.resize(n);
      for (auto& x : out) x = boost::math::ibeta_inv(a_, b_, rng.uniform01());
      return out;
    case Kind::blocks:
    case Kind::extremists: {
      // Extremists are sampled as exact point masses at 0, 1/2 and 1.
      std::vector<Block> blocks = kind_ == Kind::blocks ? blocks_
                                                        : std::vector<Block>{{0.0, 0.5 * (1.0 - a_), 0.0},
                                                                             {0.5, a_, 0.0},
                                                                             {1.0, 0.5 * (1.0 - a_), 0.0}};
      std::vector<double> cum;
      double acc = 0.0;
      for (const auto& b : blocks) cum.push_back(acc += b.mass);
      out.resize(n);
      for (auto& x : out) {
        const double u = rng.uniform01() * acc;
        auto k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
        k = std::min(k, blocks.size() - 1);
        if (blocks[k].width == 0.0) {
          x = blocks[k].center;
        } else {
          const auto [lo, hi] = placed(blocks[k]);
          x = std::clamp(lo + (hi - lo) * rng.uniform01(), 0.0, 1.0);
        }
      }
      return out;
    }
    case Kind::density_csv:
      return bcm::sample(PiecewiseConstantDensity(levels_), n, rng);
    case Kind::atoms_csv:
      if (n != 0 && n != atoms_.size()) {
        throw std::invalid_argument("csv atoms: requested " + std::to_string(n) + " opinions, file has " +
                                    std::to_string(atoms_.size()));
      }
      return atoms_;
  }
  throw std::logic_error("unhandled initial condition kind");
}

}  // namespace bcm
