#include "bcm/chaoticity.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "bcm/analysis.hpp"
#include "bcm/io.hpp"

namespace bcm {

namespace {

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

void ChaosResult::write_csv(std::ostream& out) const {
  out << "n,simulator,median_kolmogorov,median_wasserstein,seeds\n";
  for (const auto& r : rows) {
    out << r.n << ',' << (r.clock == Clock::auxiliary ? "auxiliary" : "discrete") << ','
        << io::format_double(r.median_kolmogorov) << ',' << io::format_double(r.median_wasserstein) << ','
        << r.kolmogorov.size() << '\n';
  }
}

ChaosResult chaoticity_check(const PiecewiseConstantDensity& m0, const ModelParams& params,
                             const ChaosSettings& settings) {
  params.validate();
  if (settings.n_list.empty() || settings.seeds == 0 || settings.clocks.empty()) {
    throw std::invalid_argument("chaoticity_check: need at least one N, one seed and one clock");
  }
  for (std::size_t k = 0; k < settings.n_list.size(); ++k) {
    if (settings.n_list[k] < 2 || (k > 0 && settings.n_list[k] <= settings.n_list[k - 1])) {
      throw std::invalid_argument("chaoticity_check: N list must be increasing with N >= 2");
    }
  }
  if (!(settings.t_check >= 0.0)) throw std::invalid_argument("chaoticity_check: t_check must be nonnegative");
  if (m0.cell_count() != settings.cell_count) throw std::invalid_argument("chaoticity_check: m0 does not match the grid");

  ChaosResult out{m0, {}};
  if (settings.t_check > 0.0) {
    SolverConfig cfg;
    cfg.params = params;
    cfg.cell_count = settings.cell_count;
    cfg.dt = settings.dt;
    cfg.horizon = settings.t_check;
    out.reference = KineticSolver(cfg).solve(m0).final_density;
  }
  const Cdf reference(out.reference);

  for (auto n : settings.n_list) {
    for (auto clock : settings.clocks) {
      ChaosRow row;
      row.n = n;
      row.clock = clock;
      row.kolmogorov.resize(settings.seeds);
      row.wasserstein.resize(settings.seeds);
      out.rows.push_back(std::move(row));
    }
  }
  const auto tasks = out.rows.size() * settings.seeds;
  parallel_for(tasks, settings.threads, [&](std::size_t task) {
    auto& row = out.rows[task / settings.seeds];
    const auto seed = task % settings.seeds;
    Rng sampler(settings.base_seed, 2 * seed);
    OpinionState state(sample(m0, row.n, sampler), settings.base_seed, 2 * seed + 1);
    if (row.clock == Clock::auxiliary) {
      advance_auxiliary(state, params, settings.t_check);
    } else {
      const auto steps = static_cast<std::uint64_t>(std::floor(static_cast<double>(row.n) * settings.t_check));
      for (std::uint64_t k = 0; k < steps; ++k) step_discrete(state, params);
    }
    const Cdf empirical(EmpiricalMeasure(std::vector<double>(state.opinions().begin(), state.opinions().end())));
    row.kolmogorov[seed] = kolmogorov_distance(empirical, reference);
    row.wasserstein[seed] = wasserstein1_distance(empirical, reference);
  });
  for (auto& row : out.rows) {
    row.median_kolmogorov = median(row.kolmogorov);
    row.median_wasserstein = median(row.wasserstein);
  }
  return out;
}

}  // namespace bcm
