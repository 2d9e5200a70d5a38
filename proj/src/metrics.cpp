#include "cylint/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace cylint {

std::pair<double, double> p_metric(const std::vector<Vector>& samples_x,
                                   const std::vector<Vector>& samples_y) {
  if (samples_x.size() != samples_y.size())
    throw std::invalid_argument("p_metric: length mismatch");
  const std::size_t n = samples_x.size();
  if (n == 0) throw std::invalid_argument("p_metric: empty samples");

  double sum = 0.0;
  std::vector<double> obs(n);
  for (std::size_t i = 0; i < n; ++i) {
    obs[i] = std::min(1.0, (samples_x[i] - samples_y[i]).squaredNorm());
    sum += obs[i];
  }
  double est = sum / static_cast<double>(n);

  constexpr std::size_t block = 100;
  double se = 0.0;
  std::size_t nblocks = n / block;
  if (nblocks >= 2) {
    double bsum = 0.0, bsq = 0.0;
    for (std::size_t b = 0; b < nblocks; ++b) {
      double m = 0.0;
      for (std::size_t i = 0; i < block; ++i) m += obs[b * block + i];
      m /= block;
      bsum += m;
      bsq += m * m;
    }
    double bm = bsum / nblocks;
    double var = std::max(0.0, bsq / nblocks - bm * bm);
    se = std::sqrt(var / nblocks);
  } else {
    double sq = 0.0;
    for (double o : obs) sq += o * o;
    double var = std::max(0.0, sq / n - est * est);
    se = std::sqrt(var / n);
  }
  return {est, se};
}

CfEstimate empirical_cf(const std::vector<Vector>& samples, const Vector& v) {
  if (samples.empty()) throw std::invalid_argument("empirical_cf: no samples");
  double sr = 0.0, si = 0.0, srr = 0.0, sii = 0.0;
  for (const Vector& x : samples) {
    double a = x.dot(v);
    double cr = std::cos(a), ci = std::sin(a);
    sr += cr;
    si += ci;
    srr += cr * cr;
    sii += ci * ci;
  }
  const double n = static_cast<double>(samples.size());
  double mr = sr / n, mi = si / n;
  double var = std::max(0.0, srr / n - mr * mr) +
               std::max(0.0, sii / n - mi * mi);
  return {{mr, mi}, std::sqrt(var / n)};
}

double empirical_quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw std::invalid_argument("empirical_quantile: empty");
  std::sort(xs.begin(), xs.end());
  double k = std::ceil(p * static_cast<double>(xs.size()));
  auto idx = static_cast<std::size_t>(std::max(1.0, k)) - 1;
  return xs[std::min(idx, xs.size() - 1)];
}

double tightness_radius(const std::vector<Vector>& samples, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("tightness_radius: eps must be in (0,1)");
  std::vector<double> norms;
  norms.reserve(samples.size());
  for (const Vector& x : samples) norms.push_back(x.norm());
  return empirical_quantile(std::move(norms), 1.0 - eps);
}

namespace {

struct CleanMeasure {
  std::vector<Vector> atoms;
  std::vector<double> weights;
};

CleanMeasure clean(const EmpiricalMeasure& m, const char* who) {
  double total = 0.0;
  CleanMeasure out;
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    double w = m.weights[i];
    if (w < 0.0) throw std::invalid_argument("prokhorov_distance: negative weight");
    total += w;
    if (w > 0.0) {
      out.atoms.push_back(m.atoms[i]);
      out.weights.push_back(w);
    }
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument(std::string("prokhorov_distance: ") + who +
                                " is not a probability measure");
  return out;
}

// exact distance by subset enumeration over intervals of the candidate
// epsilon lattice (combined support <= 12)
double prokhorov_exact(const CleanMeasure& mu, const CleanMeasure& nu) {
  const std::size_t a = mu.atoms.size(), b = nu.atoms.size();
  std::vector<std::vector<double>> dist(a, std::vector<double>(b));
  std::vector<double> cuts{0.0};
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j) {
      dist[i][j] = (mu.atoms[i] - nu.atoms[j]).norm();
      cuts.push_back(dist[i][j]);
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto direction_req = [&](const CleanMeasure& from, const CleanMeasure& to,
                           bool transpose, double lo) {
    // reach[i] = bitmask of `to` atoms within distance <= lo of atom i
    std::size_t nf = from.atoms.size(), nt = to.atoms.size();
    std::vector<std::uint32_t> reach(nf, 0);
    for (std::size_t i = 0; i < nf; ++i)
      for (std::size_t j = 0; j < nt; ++j) {
        double d = transpose ? dist[j][i] : dist[i][j];
        if (d <= lo + 1e-15) reach[i] |= 1u << j;
      }
    double req = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << nf); ++mask) {
      double wf = 0.0;
      std::uint32_t r = 0;
      for (std::size_t i = 0; i < nf; ++i)
        if (mask & (1u << i)) {
          wf += from.weights[i];
          r |= reach[i];
        }
      double wt = 0.0;
      for (std::size_t j = 0; j < nt; ++j)
        if (r & (1u << j)) wt += to.weights[j];
      req = std::max(req, wf - wt);
    }
    return req;
  };

  double best = 1.0;  // total mass bounds the distance
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    double lo = cuts[c];
    double hi = c + 1 < cuts.size() ? cuts[c + 1]
                                    : std::numeric_limits<double>::infinity();
    double req = std::max(direction_req(mu, nu, false, lo),
                          direction_req(nu, mu, true, lo));
    if (req <= hi + 1e-15) best = std::min(best, std::max(req, lo));
  }
  return best;
}

// max-flow (Edmonds-Karp) for the coupling bound
double max_flow(std::vector<std::vector<double>>& cap, int s, int t) {
  const int n = static_cast<int>(cap.size());
  double flow = 0.0;
  for (;;) {
    std::vector<int> parent(n, -1);
    parent[s] = s;
    std::queue<int> q;
    q.push(s);
    while (!q.empty() && parent[t] < 0) {
      int u = q.front();
      q.pop();
      for (int v = 0; v < n; ++v)
        if (parent[v] < 0 && cap[u][v] > 1e-15) {
          parent[v] = u;
          q.push(v);
        }
    }
    if (parent[t] < 0) break;
    double aug = std::numeric_limits<double>::infinity();
    for (int v = t; v != s; v = parent[v]) aug = std::min(aug, cap[parent[v]][v]);
    for (int v = t; v != s; v = parent[v]) {
      cap[parent[v]][v] -= aug;
      cap[v][parent[v]] += aug;
    }
    flow += aug;
  }
  return flow;
}

// Strassen coupling bound: d_P <= max(eps, 1 - mass movable within eps)
double prokhorov_coupling_bound(const CleanMeasure& mu,
                                const CleanMeasure& nu) {
  const int a = static_cast<int>(mu.atoms.size());
  const int b = static_cast<int>(nu.atoms.size());
  std::vector<double> cuts{0.0};
  std::vector<std::vector<double>> dist(a, std::vector<double>(b));
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < b; ++j) {
      dist[i][j] = (mu.atoms[i] - nu.atoms[j]).norm();
      cuts.push_back(dist[i][j]);
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto movable = [&](double eps) {
    int n = a + b + 2;
    int s = a + b, t = a + b + 1;
    std::vector<std::vector<double>> cap(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < a; ++i) cap[s][i] = mu.weights[i];
    for (int j = 0; j < b; ++j) cap[a + j][t] = nu.weights[j];
    for (int i = 0; i < a; ++i)
      for (int j = 0; j < b; ++j)
        if (dist[i][j] <= eps + 1e-15) cap[i][a + j] = 1.0;
    return max_flow(cap, s, t);
  };

  double best = 1.0;
  // f(eps) = max(eps, 1 - movable(eps)): decreasing part then increasing;
  // evaluate on a bisected candidate lattice
  std::size_t lo = 0, hi = cuts.size() - 1;
  auto value = [&](std::size_t c) {
    return std::max(cuts[c], 1.0 - movable(cuts[c]));
  };
  best = std::min(value(lo), value(hi));
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    double v = value(mid);
    best = std::min(best, v);
    if (1.0 - movable(cuts[mid]) > cuts[mid])
      lo = mid;
    else
      hi = mid;
  }
  best = std::min(best, value(lo));
  best = std::min(best, value(hi));
  return best;
}

}  // namespace

double prokhorov_distance(const EmpiricalMeasure& mu,
                          const EmpiricalMeasure& nu) {
  CleanMeasure cmu = clean(mu, "mu");
  CleanMeasure cnu = clean(nu, "nu");
  std::size_t support = cmu.atoms.size() + cnu.atoms.size();
  if (support > 200)
    throw std::length_error("prokhorov_distance: support too large");
  if (support <= 12) return prokhorov_exact(cmu, cnu);
  return prokhorov_coupling_bound(cmu, cnu);
}

std::complex<double> ConditionalLaw::cf(double beta) const {
  if (kind == Kind::Gaussian)
    return {std::exp(-0.5 * beta * beta * sigma * sigma), 0.0};
  std::complex<double> s{0.0, 0.0};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double x = values[i][0];
    s += probs[i] * std::complex<double>(std::cos(beta * x), std::sin(beta * x));
  }
  return s;
}

std::pair<Vector, int> ConditionalLaw::sample(Rng& rng,
                                              Eigen::Index dim) const {
  (void)dim;  // entries are 1-d; finite values carry their own dimension
  if (kind == Kind::Gaussian) {
    double x = sigma * rng.gaussian();
    Vector v(1);
    v[0] = x;
    return {v, x >= 0.0 ? 1 : 0};
  }
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u <= acc) return {values[i], static_cast<int>(i)};
  }
  return {values.back(), static_cast<int>(values.size()) - 1};
}

namespace {

struct PathRecord {
  std::vector<int> states;   // state before each retained draw
  std::vector<Vector> draws;
  Vector sum;
};

PathRecord simulate_row(const TangentRow& row, Rng& rng) {
  PathRecord rec;
  rec.sum = Vector::Zero(row.dim);
  int state = row.initial_state;
  for (int k = 0; k < row.steps; ++k) {
    ConditionalLaw law = row.law(k, state);
    auto [value, outcome] = law.sample(rng, row.dim);
    rec.states.push_back(state);
    rec.draws.push_back(value);
    rec.sum += value;
    state = row.transition(state, outcome);
    if (row.stop_state >= 0 && state == row.stop_state) break;
  }
  return rec;
}

void count_draw(const TangentRow& row, int step, int state, int outcome,
                std::map<std::pair<int, int>, long long>& counts) {
  ConditionalLaw law = row.law(step, state);
  if (law.kind == ConditionalLaw::Kind::Finite)
    ++counts[{state, outcome}];
}

}  // namespace

DecoupleResult decoupled_tangent(const TangentRow& row, int replicas,
                                 std::uint64_t master_seed) {
  DecoupleResult res;
  res.original.reserve(replicas);
  res.decoupled.reserve(replicas);
  for (int r = 0; r < replicas; ++r) {
    Rng orig(derive_seed(master_seed, static_cast<std::uint64_t>(r), 0));
    Rng dec(derive_seed(master_seed, static_cast<std::uint64_t>(r), 1));

    // original adapted path
    PathRecord rec;
    rec.sum = Vector::Zero(row.dim);
    int state = row.initial_state;
    for (int k = 0; k < row.steps; ++k) {
      ConditionalLaw law = row.law(k, state);
      auto [value, outcome] = law.sample(orig, row.dim);
      rec.states.push_back(state);
      rec.sum += value;
      ++res.state_visits[state];
      count_draw(row, k, state, outcome, res.original_counts);
      state = row.transition(state, outcome);
      if (row.stop_state >= 0 && state == row.stop_state) break;
    }
    res.original.push_back(rec.sum);

    // decoupled draws: fresh, independent, from the conditional laws along
    // the original path's history states
    Vector dsum = Vector::Zero(row.dim);
    for (std::size_t k = 0; k < rec.states.size(); ++k) {
      ConditionalLaw law = row.law(static_cast<int>(k), rec.states[k]);
      auto [value, outcome] = law.sample(dec, row.dim);
      dsum += value;
      count_draw(row, static_cast<int>(k), rec.states[k], outcome,
                 res.decoupled_counts);
    }
    res.decoupled.push_back(dsum);
  }
  return res;
}

ConditioningReport conditioning_test(
    const TangentRow& row, const std::vector<double>& betas,
    const std::function<std::complex<double>(double)>& target, int replicas,
    std::uint64_t master_seed) {
  if (row.dim != 1)
    throw std::invalid_argument("conditioning_test: entries must be real");
  for (double beta : betas)
    if (std::abs(target(beta)) < 1e-12)
      throw std::invalid_argument(
          "conditioning_test: target c(beta) must be nonzero");

  ConditioningReport rep;
  rep.betas = betas;
  std::vector<double> prod_dev(betas.size(), 0.0);
  std::vector<std::complex<double>> cf_sum(betas.size(), {0.0, 0.0});
  for (int r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(r), 0));
    PathRecord rec = simulate_row(row, rng);
    for (std::size_t b = 0; b < betas.size(); ++b) {
      std::complex<double> prod{1.0, 0.0};
      for (std::size_t k = 0; k < rec.states.size(); ++k)
        prod *= row.law(static_cast<int>(k), rec.states[k]).cf(betas[b]);
      prod_dev[b] += std::abs(prod - target(betas[b]));
      double s = rec.sum[0] * betas[b];
      cf_sum[b] += std::complex<double>(std::cos(s), std::sin(s));
    }
  }
  for (std::size_t b = 0; b < betas.size(); ++b) {
    rep.product_dev.push_back(prod_dev[b] / replicas);
    rep.sum_cf_dev.push_back(
        std::abs(cf_sum[b] / static_cast<double>(replicas) - target(betas[b])));
  }
  return rep;
}

ImageTailReport image_measure_tail_probe(const LevyModel& model,
                                         const std::vector<Matrix>& k_family,
                                         double dt,
                                         const std::vector<double>& r_grid,
                                         int n, std::uint64_t master_seed) {
  ImageTailReport rep;
  rep.r_grid = r_grid;
  if (k_family.empty()) return rep;
  const Eigen::Index d_v = k_family[0].rows();
  rep.tail_prob.assign(r_grid.size(), 0.0);
  rep.coord_tail.assign(static_cast<std::size_t>(d_v) + 1, 0.0);

  for (std::size_t f = 0; f < k_family.size(); ++f) {
    std::vector<long long> exceed(r_grid.size(), 0);
    std::vector<double> tail_mass(static_cast<std::size_t>(d_v) + 1, 0.0);
    for (int i = 0; i < n; ++i) {
      Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(f),
                          static_cast<std::uint64_t>(i)));
      Vector x = radonify_increment(model, k_family[f], dt, rng);
      double norm = x.norm();
      for (std::size_t g = 0; g < r_grid.size(); ++g)
        if (norm >= r_grid[g]) ++exceed[g];
      double tail = x.squaredNorm();
      tail_mass[0] += std::min(1.0, tail);
      for (Eigen::Index k = 0; k < d_v; ++k) {
        tail -= x[k] * x[k];
        tail_mass[static_cast<std::size_t>(k) + 1] += std::min(1.0, std::max(0.0, tail));
      }
    }
    for (std::size_t g = 0; g < r_grid.size(); ++g)
      rep.tail_prob[g] = std::max(rep.tail_prob[g],
                                  static_cast<double>(exceed[g]) / n);
    for (std::size_t k = 0; k <= static_cast<std::size_t>(d_v); ++k)
      rep.coord_tail[k] = std::max(rep.coord_tail[k], tail_mass[k] / n);
  }
  return rep;
}

}  // namespace cylint
