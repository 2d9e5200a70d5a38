#pragma once

#include <complex>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "cylint/levy.hpp"

namespace cylint {

// mean of 1 ^ ||X_i - Y_i||^2 over coupled samples; standard error by batch
// means over blocks of 100 replicas
std::pair<double, double> p_metric(const std::vector<Vector>& samples_x,
                                   const std::vector<Vector>& samples_y);

struct CfEstimate {
  std::complex<double> value;
  double se = 0.0;
};

CfEstimate empirical_cf(const std::vector<Vector>& samples, const Vector& v);

// empirical p-quantile: smallest order statistic covering mass p
double empirical_quantile(std::vector<double> xs, double p);

// (1-eps)-quantile of the sample norms
double tightness_radius(const std::vector<Vector>& samples, double eps);

struct EmpiricalMeasure {
  std::vector<Vector> atoms;
  std::vector<double> weights;
};

// Prokhorov distance between discrete probability measures. Exact by subset
// enumeration for combined support <= 12 atoms; a coupling (Strassen) upper
// bound for larger supports up to 200 atoms.
double prokhorov_distance(const EmpiricalMeasure& mu,
                          const EmpiricalMeasure& nu);

// Conditional distribution attached to one history state: either a finite
// support table or a centered 1-d Gaussian.
struct ConditionalLaw {
  enum class Kind { Finite, Gaussian };
  Kind kind = Kind::Finite;
  std::vector<double> probs;    // Finite
  std::vector<Vector> values;   // Finite
  double sigma = 1.0;           // Gaussian std deviation (dim must be 1)

  // conditional characteristic function (1-d entries only)
  std::complex<double> cf(double beta) const;
  // draw; outcome is the support index (Finite) or the sign bit (Gaussian)
  std::pair<Vector, int> sample(Rng& rng, Eigen::Index dim) const;
};

// One row of an adapted array with finite-state conditional-law structure.
// The conditional law of X_{n,k} depends only on (k, state); the state
// transition is deterministic given the drawn outcome.
struct TangentRow {
  int steps = 0;
  Eigen::Index dim = 1;
  int initial_state = 0;
  std::function<ConditionalLaw(int step, int state)> law;
  std::function<int(int state, int outcome)> transition;
  // bounded stopping rule: stop after the step whose transition enters
  // stop_state; -1 disables (sigma = steps)
  int stop_state = -1;
};

struct DecoupleResult {
  std::vector<Vector> original;   // S_n(sigma) per replica
  std::vector<Vector> decoupled;  // S*_n(sigma) per replica
  // finite-support draw counts keyed by (state, outcome); state visit counts
  // are identical for both runs since the decoupled draws replay the
  // original path's history states
  std::map<std::pair<int, int>, long long> original_counts;
  std::map<std::pair<int, int>, long long> decoupled_counts;
  std::map<int, long long> state_visits;
};

// Simulate the original adapted sums and the decoupled tangent sums: fresh
// independent draws from the conditional laws evaluated along the original
// path's history states.
DecoupleResult decoupled_tangent(const TangentRow& row, int replicas,
                                 std::uint64_t master_seed);

struct ConditioningReport {
  std::vector<double> betas;
  std::vector<double> product_dev;  // E| prod_k Delta_{n,k}(beta) - c(beta) |
  std::vector<double> sum_cf_dev;   // | E e^{i beta S_n} - c(beta) |
};

// Executable form of the principle of conditioning for real-valued rows.
ConditioningReport conditioning_test(
    const TangentRow& row, const std::vector<double>& betas,
    const std::function<std::complex<double>(double)>& target, int replicas,
    std::uint64_t master_seed);

struct ImageTailReport {
  std::vector<double> r_grid;
  std::vector<double> tail_prob;   // sup over K of P(||phi(Z)|| >= r)
  // per N' = 0..d_V: sup over K of E[1 ^ sum_{k>N'} <phi(Z), f_k>^2]
  std::vector<double> coord_tail;
};

// Uniform-smallness diagnostics for the image measures {law(phi(Z)): phi in K}.
ImageTailReport image_measure_tail_probe(const LevyModel& model,
                                         const std::vector<Matrix>& k_family,
                                         double dt,
                                         const std::vector<double>& r_grid,
                                         int n, std::uint64_t master_seed);

}  // namespace cylint
