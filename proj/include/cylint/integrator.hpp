#pragma once

#include <string>
#include <vector>

#include "cylint/integrand.hpp"

namespace cylint {

struct Provenance {
  std::string model_id, integrand_id, partition_id;
  std::uint64_t master_seed = 0;
};

struct IntegralSample {
  std::vector<double> observation_times;
  // values[replica][time index]
  std::vector<std::vector<Vector>> values;
  Provenance provenance;
};

// I(Psi)(t) = sum_j Phi_j (L(t ^ t_{j+1}) - L(t ^ t_j)) per replica.
// The process partition and t must lie on the panel grid.
std::vector<Vector> integrate_simple(const SimpleProcess& sp, double t,
                                     const NoisePanel& panel);

// Cadlag variant evaluated at all partition points:
// I~(t_1) = 0, I~(t_{k+1}) = sum_{j<=k} Phi_j (L(t_{j+1}) - L(t_j)).
IntegralSample integrate_cadlag(const SimpleProcess& sp,
                                const NoisePanel& panel);

struct RefinementReport {
  std::vector<int> levels;          // partition sizes (powers of two)
  std::vector<double> pairwise_p;   // consecutive levels, coupled
  std::vector<double> pairwise_se;
  std::vector<double> final_p;      // each level vs the finest
  std::vector<double> final_se;
};

// Coupled partition-refinement study: one shared panel on the finest level;
// coarse increments are sums of fine increments.
RefinementReport refine_and_integrate(const LevyModel& model,
                                      const IntegrandRule& rule,
                                      const std::vector<int>& levels,
                                      double horizon, double t, int replicas,
                                      std::uint64_t master_seed,
                                      int threads = 1);

struct TailReport {
  std::vector<double> eps;        // requested tail levels
  std::vector<double> quantiles;  // (1-eps)-quantiles of the norms
  std::size_t count = 0;
};

// Elementary integrals sum_k Gamma_k (I(Psi)(s_{k+1}) - I(Psi)(s_k)) over a
// family of contraction-valued step processes on a sub-partition of Psi's.
// theta_family[m][k] is the contraction of member m on (s_k, s_{k+1}].
TailReport elementary_integral_probe(
    const SimpleProcess& sp,
    const std::vector<std::vector<Matrix>>& theta_family,
    const std::vector<double>& theta_partition, const NoisePanel& panel,
    const std::vector<double>& eps = {0.1, 0.01});

}  // namespace cylint
