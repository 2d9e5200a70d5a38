#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "cylint/hilbert.hpp"
#include "cylint/rng.hpp"

namespace cylint {

// One-dimensional coordinate laws of the diagonal model. The coordinate k
// of the driving noise is sigma_k times the chosen unit-scale law.
enum class CoordLaw { Brownian, CompoundPoisson, SymmetricStable };
enum class JumpDist { Rademacher, StdNormal };

struct DiagonalJumps {
  std::vector<double> scales;  // sigma_k > 0
  CoordLaw law = CoordLaw::Brownian;
  double rate = 1.0;           // CompoundPoisson intensity
  JumpDist jump_dist = JumpDist::Rademacher;
  double alpha = 1.5;          // SymmetricStable index, in (0,2)
};

// symbol contribution -scale * ||u||^alpha; no coordinate representation
struct StableJumps {
  double alpha = 1.5;  // in (0,2)
  double scale = 1.0;  // c > 0
};

using JumpFamily = std::variant<std::monostate, DiagonalJumps, StableJumps>;

// A cylindrical Levy model with closed-form symbol and exact samplers.
// The symbol is S(u) = i<drift,u> - (1/2)<Qu,u> + jump term.
struct LevyModel {
  Vector drift;                          // length d_U
  std::optional<SOperator> gaussian_cov; // Q; empty means zero
  JumpFamily jumps;

  Eigen::Index dim() const { return drift.size(); }
  bool coordinate_representable() const {
    return !std::holds_alternative<StableJumps>(jumps);
  }

  std::complex<double> symbol(const Vector& u) const;

  static LevyModel gaussian(Eigen::Index d, double variance = 1.0);
  static LevyModel diagonal(DiagonalJumps jumps);
  static LevyModel canonical_stable(Eigen::Index d, double alpha, double scale);

  void validate() const;  // parameter ranges, shape consistency
};

// exact law of <Phi(L(t)-L(s)), v> for deterministic phi: exp(dt * S(phi* v))
std::complex<double> increment_cf(const LevyModel& model, const Matrix& phi,
                                  double dt, const Vector& v);

// Coordinate increments of the driving noise on the finest partition,
// all replicas. Regeneration from (master_seed, model, partition) is
// bit-identical regardless of thread count.
struct NoisePanel {
  std::vector<double> times;  // 0 = t_1 < ... < t_{M+1} = T
  int replicas = 0;
  Eigen::Index dim = 0;
  std::uint64_t master_seed = 0;
  std::vector<double> data;   // row-major (replica, step, coordinate)

  int steps() const { return static_cast<int>(times.size()) - 1; }
  double increment(int r, int j, Eigen::Index k) const {
    return data[(static_cast<std::size_t>(r) * steps() + j) * dim + k];
  }
  Vector increment_vector(int r, int j) const;
  // sum of step increments with step interval contained in (t0, t1]
  Vector aggregate(int r, double t0, double t1) const;
  // panel index of a time point, or -1 if not on the grid
  int time_index(double t) const;
};

NoisePanel generate_noise_panel(const LevyModel& model,
                                const std::vector<double>& partition,
                                int replicas, std::uint64_t master_seed,
                                int threads = 1);

// One exact sample of Phi(L(t)-L(s)) for deterministic phi over dt = t-s.
Vector radonify_increment(const LevyModel& model, const Matrix& phi, double dt,
                          Rng& rng);

// Scalar increment law (L(t)-L(s))(u); used by the domination check.
double sample_scalar_increment(const LevyModel& model, const Vector& u,
                               double dt, Rng& rng);

// 1 / E[1 ^ xi^2] for standard normal xi, by adaptive quadrature
double gauss_dom_constant();

struct GaussDomReport {
  double lhs = 0.0, rhs = 0.0, c = 0.0;
  double lhs_se = 0.0, rhs_se = 0.0;
};

// Monte Carlo check of the domination inequality
// p(phi Z) <= c * int p(Zu) (gamma o (phi*)^{-1})(du).
GaussDomReport gauss_dom_check(const LevyModel& model, const Matrix& phi,
                               double dt, int n, std::uint64_t master_seed);

}  // namespace cylint
