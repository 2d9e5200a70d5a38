#include "cylint/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cylint {

IntegrandRule constant_rule(Matrix phi) {
  IntegrandRule r;
  r.d_v = phi.rows();
  r.d_u = phi.cols();
  r.eval = [phi = std::move(phi)](double, const HistoryView&) { return phi; };
  return r;
}

IntegrandRule poly_rule(Matrix phi, std::vector<double> coeffs) {
  IntegrandRule r;
  r.d_v = phi.rows();
  r.d_u = phi.cols();
  r.eval = [phi = std::move(phi),
            coeffs = std::move(coeffs)](double t, const HistoryView&) {
    double f = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) f = f * t + coeffs[i];
    return Matrix(f * phi);
  };
  return r;
}

IntegrandRule exp_decay_rule(Matrix phi, double rate) {
  IntegrandRule r;
  r.d_v = phi.rows();
  r.d_u = phi.cols();
  r.eval = [phi = std::move(phi), rate](double t, const HistoryView&) {
    return Matrix(std::exp(-rate * t) * phi);
  };
  return r;
}

IntegrandRule noise_adapted_clamp_rule(Matrix phi, double cap) {
  IntegrandRule r;
  r.d_v = phi.rows();
  r.d_u = phi.cols();
  r.eval = [phi = std::move(phi), cap](double, const HistoryView& h) {
    double f = std::min(cap, h.cumulative().norm());
    return Matrix(f * phi);
  };
  return r;
}

namespace {

void check_partition(const std::vector<double>& partition) {
  if (partition.size() < 2 || partition.front() != 0.0)
    throw std::invalid_argument("partition must start at 0 with >= 2 points");
  for (std::size_t i = 1; i < partition.size(); ++i)
    if (!(partition[i] > partition[i - 1]))
      throw std::invalid_argument("partition must be strictly increasing");
}

}  // namespace

SimpleProcess discretize(const IntegrandRule& rule,
                         std::vector<double> partition) {
  check_partition(partition);
  SimpleProcess sp;
  sp.d_v = rule.d_v;
  sp.d_u = rule.d_u;
  sp.partition = std::move(partition);
  std::size_t n = sp.partition.size() - 1;
  sp.rules.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    double tj = sp.partition[j];
    IntegrandRule frozen;
    frozen.d_v = rule.d_v;
    frozen.d_u = rule.d_u;
    frozen.eval = [eval = rule.eval, tj](double, const HistoryView& h) {
      return eval(tj, h.truncated(tj));
    };
    sp.rules.push_back(std::move(frozen));
  }
  return sp;
}

PathGrid sample_path(const IntegrandRule& rule, const std::vector<double>& grid,
                     const HistoryView& history) {
  PathGrid p;
  p.times = grid;
  p.values.reserve(grid.size());
  for (double t : grid)
    p.values.push_back(rule.eval(t, history.truncated(t)));
  return p;
}

PathGrid sample_path(const SimpleProcess& sp, const std::vector<double>& grid,
                     const HistoryView& history) {
  PathGrid p;
  p.times = grid;
  p.values.reserve(grid.size());
  for (double t : grid) {
    // value on (t_j, t_{j+1}]; at t=0 take the first interval's value
    std::size_t j = 0;
    while (j + 1 < sp.rules.size() && t > sp.partition[j + 1] + 1e-12) ++j;
    double tj = sp.partition[j];
    p.values.push_back(sp.rules[j].eval(tj, history.truncated(tj)));
  }
  return p;
}

namespace {

// caglad evaluation: value at t is values[i] for the first times[i] >= t
const Matrix& eval_grid(const PathGrid& p, double t) {
  for (std::size_t i = 0; i < p.times.size(); ++i)
    if (p.times[i] >= t - 1e-15) return p.values[i];
  return p.values.back();
}

double interval_dist(double x, double lo, double hi) {
  if (x < lo) return lo - x;
  if (x > hi) return x - hi;
  return 0.0;
}

}  // namespace

double skorokhod_distance_ub(const PathGrid& p, const PathGrid& q,
                             int knot_budget) {
  if (p.times.empty() || q.times.empty())
    throw std::invalid_argument("skorokhod_distance_ub: empty path");
  if (p.values[0].rows() != q.values[0].rows() ||
      p.values[0].cols() != q.values[0].cols())
    throw std::invalid_argument("skorokhod_distance_ub: shape mismatch");
  if (std::abs(p.times.back() - q.times.back()) > 1e-12)
    throw std::invalid_argument("skorokhod_distance_ub: horizon mismatch");

  // fallback: identity time change on the merged grid
  std::vector<double> merged(p.times);
  merged.insert(merged.end(), q.times.begin(), q.times.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  double identity_value = 0.0;
  for (double t : merged)
    identity_value =
        std::max(identity_value, (eval_grid(p, t) - eval_grid(q, t)).norm());

  // minimax alignment of segments: cell (i,j) means p's segment
  // (s_{i-1}, s_i] overlaps q's segment (r_{j-1}, r_j] under the time change
  const std::vector<double>& s = p.times;
  const std::vector<double>& r = q.times;
  const int a = static_cast<int>(s.size()) - 1;
  const int b = static_cast<int>(r.size()) - 1;
  if (a == 0 || b == 0) return identity_value;

  const double inf = std::numeric_limits<double>::infinity();
  const int band = std::max(knot_budget, std::abs(a - b));
  auto cost = [&](int i, int j) {
    return (p.values[i] - q.values[j]).norm();
  };
  std::vector<std::vector<double>> d(a + 1, std::vector<double>(b + 1, inf));
  d[1][1] = std::max(cost(1, 1), (p.values[0] - q.values[0]).norm());
  for (int i = 1; i <= a; ++i) {
    for (int j = 1; j <= b; ++j) {
      if (i == 1 && j == 1) continue;
      if (std::abs(i - j) > band) continue;
      double best = inf;
      if (i > 1 && j > 1 && std::isfinite(d[i - 1][j - 1]))
        best = std::min(best,
                        std::max(d[i - 1][j - 1], std::abs(s[i - 1] - r[j - 1])));
      if (i > 1 && std::isfinite(d[i - 1][j]))
        best = std::min(
            best, std::max(d[i - 1][j], interval_dist(s[i - 1], r[j - 1], r[j])));
      if (j > 1 && std::isfinite(d[i][j - 1]))
        best = std::min(
            best, std::max(d[i][j - 1], interval_dist(r[j - 1], s[i - 1], s[i])));
      d[i][j] = std::max(cost(i, j), best);
    }
  }
  return std::min(identity_value, d[a][b]);
}

}  // namespace cylint
