#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "cssense/snr.hpp"

namespace cssense {

PsoResult pso_tune(const Eigen::VectorXcd& samples, IntRange L_bounds, IntRange K_bounds,
                   const PsoOpts& opts) {
  if (L_bounds.lo > L_bounds.hi || K_bounds.lo > K_bounds.hi) {
    throw std::invalid_argument("pso_tune: empty bounds");
  }
  if (L_bounds.lo < 2 || K_bounds.lo < 2) throw std::invalid_argument("pso_tune: L and K must be >= 2");
  if (2 * L_bounds.hi > samples.size()) throw std::invalid_argument("pso_tune: L range too large for the record");
  if (opts.swarm < 2) throw std::invalid_argument("pso_tune: swarm must be >= 2");
  if (opts.iters < 1) throw std::invalid_argument("pso_tune: iters must be >= 1");

  constexpr int dims = 2;
  const double lo[dims] = {static_cast<double>(L_bounds.lo), static_cast<double>(K_bounds.lo)};
  const double hi[dims] = {static_cast<double>(L_bounds.hi), static_cast<double>(K_bounds.hi)};
  double vmax[dims];
  for (int d = 0; d < dims; ++d) vmax[d] = std::max(1.0, 0.5 * (hi[d] - lo[d]));

  PsoResult out;
  std::map<std::pair<long, long>, double> cache;
  auto fitness = [&](const double* pos) {
    const long l = std::lround(pos[0]);
    const long k = std::lround(pos[1]);
    auto it = cache.find({l, k});
    if (it != cache.end()) return it->second;
    const SnrEstimate est =
        estimate_snr(samples, static_cast<std::size_t>(l), static_cast<std::size_t>(k));
    const double f = opts.known_snr_db ? std::fabs(est.snr_db - *opts.known_snr_db) : est.goodness_D;
    cache.emplace(std::make_pair(l, k), f);
    return f;
  };

  Rng rng = make_rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t s = opts.swarm;
  std::vector<double> pos(s * dims), vel(s * dims), pbest(s * dims), pbest_f(s);
  for (std::size_t p = 0; p < s; ++p) {
    for (int d = 0; d < dims; ++d) {
      pos[p * dims + d] = lo[d] + unit(rng) * (hi[d] - lo[d]);
      vel[p * dims + d] = (2.0 * unit(rng) - 1.0) * vmax[d];
    }
  }
  std::vector<double> gbest(dims);
  double gbest_f = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < s; ++p) {
    pbest_f[p] = fitness(&pos[p * dims]);
    std::copy_n(&pos[p * dims], dims, &pbest[p * dims]);
    if (pbest_f[p] < gbest_f) {
      gbest_f = pbest_f[p];
      std::copy_n(&pos[p * dims], dims, gbest.begin());
    }
  }

  for (std::size_t it = 0; it < opts.iters; ++it) {
    for (std::size_t p = 0; p < s; ++p) {
      for (int d = 0; d < dims; ++d) {
        const std::size_t i = p * dims + static_cast<std::size_t>(d);
        const double r1 = unit(rng), r2 = unit(rng);
        double v = opts.inertia * vel[i] + opts.cognitive * r1 * (pbest[i] - pos[i]) +
                   opts.social * r2 * (gbest[static_cast<std::size_t>(d)] - pos[i]);
        v = std::clamp(v, -vmax[d], vmax[d]);
        vel[i] = v;
        pos[i] = std::clamp(pos[i] + v, lo[d], hi[d]);
      }
    }
    // fitness first, then the gbest reduction in particle order
    for (std::size_t p = 0; p < s; ++p) {
      const double f = fitness(&pos[p * dims]);
      if (f < pbest_f[p]) {
        pbest_f[p] = f;
        std::copy_n(&pos[p * dims], dims, &pbest[p * dims]);
      }
    }
    for (std::size_t p = 0; p < s; ++p) {
      if (pbest_f[p] < gbest_f) {
        gbest_f = pbest_f[p];
        std::copy_n(&pbest[p * dims], dims, gbest.begin());
      }
    }
    out.gbest_trace.push_back(gbest_f);
  }
  out.L = static_cast<std::size_t>(std::lround(gbest[0]));
  out.K = static_cast<std::size_t>(std::lround(gbest[1]));
  out.best_fitness = gbest_f;
  out.evaluations = cache.size();
  return out;
}

}  // namespace cssense
