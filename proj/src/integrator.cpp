#include "cylint/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cylint/metrics.hpp"
#include "cylint/parallel.hpp"

namespace cylint {

namespace {

// panel indices of the partition points; throws on misalignment
std::vector<int> align_partition(const std::vector<double>& partition,
                                 const NoisePanel& panel) {
  std::vector<int> idx;
  idx.reserve(partition.size());
  for (double t : partition) {
    int i = panel.time_index(t);
    if (i < 0)
      throw std::invalid_argument(
          "partition point not on the panel grid (alignment error)");
    idx.push_back(i);
  }
  return idx;
}

// prefix[i] = sum of the replica's increments over steps < i
std::vector<Vector> replica_prefix(const NoisePanel& panel, int r) {
  std::vector<Vector> prefix(panel.steps() + 1);
  prefix[0] = Vector::Zero(panel.dim);
  for (int j = 0; j < panel.steps(); ++j)
    prefix[j + 1] = prefix[j] + panel.increment_vector(r, j);
  return prefix;
}

Vector integrate_one(const SimpleProcess& sp, const std::vector<int>& idx,
                     int t_idx, const NoisePanel& panel, int r,
                     const std::vector<Vector>& prefix) {
  // runs of intervals with bitwise-identical operator values are applied as
  // one product over the summed noise increment, so integrals of piecewise-
  // constant-in-operator processes agree exactly across nested partitions
  Vector acc = Vector::Zero(sp.d_v);
  Matrix cur;
  int run_lo = 0, run_hi = 0;
  bool open = false;
  for (std::size_t j = 0; j < sp.rules.size(); ++j) {
    int lo = idx[j];
    if (t_idx <= lo) break;
    int hi = std::min(t_idx, idx[j + 1]);
    double tj = sp.partition[j];
    Matrix phi = sp.rules[j].eval(tj, HistoryView(&panel, r, tj));
    if (open && run_hi == lo && phi.rows() == cur.rows() &&
        (phi.array() == cur.array()).all()) {
      run_hi = hi;
    } else {
      if (open) acc += cur * (prefix[run_hi] - prefix[run_lo]);
      cur = std::move(phi);
      run_lo = lo;
      run_hi = hi;
      open = true;
    }
  }
  if (open) acc += cur * (prefix[run_hi] - prefix[run_lo]);
  return acc;
}

}  // namespace

std::vector<Vector> integrate_simple(const SimpleProcess& sp, double t,
                                     const NoisePanel& panel) {
  if (sp.d_u != panel.dim)
    throw std::invalid_argument("integrate_simple: dimension mismatch");
  std::vector<int> idx = align_partition(sp.partition, panel);
  int t_idx = panel.time_index(t);
  if (t_idx < 0)
    throw std::invalid_argument(
        "integrate_simple: t not on the panel grid (alignment error)");
  std::vector<Vector> out(panel.replicas);
  for (int r = 0; r < panel.replicas; ++r) {
    auto prefix = replica_prefix(panel, r);
    out[r] = integrate_one(sp, idx, t_idx, panel, r, prefix);
  }
  return out;
}

IntegralSample integrate_cadlag(const SimpleProcess& sp,
                                const NoisePanel& panel) {
  if (sp.d_u != panel.dim)
    throw std::invalid_argument("integrate_cadlag: dimension mismatch");
  std::vector<int> idx = align_partition(sp.partition, panel);
  IntegralSample sample;
  sample.observation_times = sp.partition;
  sample.values.resize(panel.replicas);
  for (int r = 0; r < panel.replicas; ++r) {
    auto prefix = replica_prefix(panel, r);
    std::vector<Vector>& row = sample.values[r];
    row.resize(sp.partition.size());
    row[0] = Vector::Zero(sp.d_v);
    Vector acc = Vector::Zero(sp.d_v);
    for (std::size_t j = 0; j < sp.rules.size(); ++j) {
      double tj = sp.partition[j];
      Matrix phi = sp.rules[j].eval(tj, HistoryView(&panel, r, tj));
      acc += phi * (prefix[idx[j + 1]] - prefix[idx[j]]);
      row[j + 1] = acc;
    }
  }
  return sample;
}

RefinementReport refine_and_integrate(const LevyModel& model,
                                      const IntegrandRule& rule,
                                      const std::vector<int>& levels,
                                      double horizon, double t, int replicas,
                                      std::uint64_t master_seed, int threads) {
  if (levels.empty())
    throw std::invalid_argument("refine_and_integrate: empty level list");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    int m = levels[i];
    if (m < 1 || (m & (m - 1)) != 0)
      throw std::invalid_argument(
          "refine_and_integrate: levels must be dyadic partition sizes");
    if (i > 0 && levels[i] <= levels[i - 1])
      throw std::invalid_argument(
          "refine_and_integrate: levels must be increasing");
  }

  auto uniform_partition = [&](int m) {
    std::vector<double> part(m + 1);
    for (int j = 0; j <= m; ++j)
      part[j] = horizon * static_cast<double>(j) / m;
    part[0] = 0.0;
    part[m] = horizon;
    return part;
  };

  NoisePanel panel = generate_noise_panel(
      model, uniform_partition(levels.back()), replicas, master_seed, threads);

  std::vector<SimpleProcess> procs;
  std::vector<std::vector<int>> idx;
  for (int m : levels) {
    procs.push_back(discretize(rule, uniform_partition(m)));
    idx.push_back(align_partition(procs.back().partition, panel));
  }
  int t_idx = panel.time_index(t);
  if (t_idx < 0)
    throw std::invalid_argument(
        "refine_and_integrate: t not on the finest grid");

  std::vector<std::vector<Vector>> values(
      levels.size(), std::vector<Vector>(replicas));
  parallel_for(replicas, threads, [&](int r) {
    auto prefix = replica_prefix(panel, r);
    for (std::size_t l = 0; l < levels.size(); ++l)
      values[l][r] = integrate_one(procs[l], idx[l], t_idx, panel, r, prefix);
  });

  RefinementReport rep;
  rep.levels = levels;
  for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
    auto [est, se] = p_metric(values[l], values[l + 1]);
    rep.pairwise_p.push_back(est);
    rep.pairwise_se.push_back(se);
  }
  for (std::size_t l = 0; l < levels.size(); ++l) {
    auto [est, se] = p_metric(values[l], values.back());
    rep.final_p.push_back(est);
    rep.final_se.push_back(se);
  }
  return rep;
}

TailReport elementary_integral_probe(
    const SimpleProcess& sp,
    const std::vector<std::vector<Matrix>>& theta_family,
    const std::vector<double>& theta_partition, const NoisePanel& panel,
    const std::vector<double>& eps) {
  if (theta_partition.size() < 2)
    throw std::invalid_argument("elementary_integral_probe: bad partition");
  for (double s : theta_partition)
    if (std::none_of(sp.partition.begin(), sp.partition.end(),
                     [&](double t) { return std::abs(t - s) <= 1e-12; }))
      throw std::invalid_argument(
          "elementary_integral_probe: theta partition must refine into the "
          "process partition");
  std::size_t n_int = theta_partition.size() - 1;
  for (const auto& theta : theta_family) {
    if (theta.size() != n_int)
      throw std::invalid_argument(
          "elementary_integral_probe: contraction count mismatch");
    for (const Matrix& gamma : theta)
      if (operator_norm(gamma) > 1.0 + 1e-9)
        throw std::invalid_argument(
            "elementary_integral_probe: non-contraction operator");
  }

  std::vector<int> idx = align_partition(sp.partition, panel);
  std::vector<double> norms;
  norms.reserve(theta_family.size() * panel.replicas);
  for (int r = 0; r < panel.replicas; ++r) {
    auto prefix = replica_prefix(panel, r);
    std::vector<Vector> at(theta_partition.size());
    for (std::size_t k = 0; k < theta_partition.size(); ++k) {
      int t_idx = panel.time_index(theta_partition[k]);
      at[k] = integrate_one(sp, idx, t_idx, panel, r, prefix);
    }
    for (const auto& theta : theta_family) {
      Vector acc = Vector::Zero(sp.d_v);
      for (std::size_t k = 0; k < n_int; ++k)
        acc += theta[k] * (at[k + 1] - at[k]);
      norms.push_back(acc.norm());
    }
  }

  TailReport rep;
  rep.eps = eps;
  rep.count = norms.size();
  for (double e : eps)
    rep.quantiles.push_back(empirical_quantile(norms, 1.0 - e));
  return rep;
}

}  // namespace cylint
