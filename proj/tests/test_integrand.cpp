#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cylint/integrand.hpp"

using namespace cylint;

namespace {

NoisePanel small_panel(std::uint64_t seed = 12) {
  LevyModel m = LevyModel::gaussian(2, 1.0);
  return generate_noise_panel(m, {0.0, 0.25, 0.5, 0.75, 1.0}, 3, seed, 1);
}

// a unit-HS-norm operator for the jump-alignment example
Matrix unit_op() {
  Matrix phi = Matrix::Zero(2, 2);
  phi(0, 0) = 1.0;
  return phi;
}

// step path: 0 on [0, jump], phi on (jump, 1]
PathGrid step_path(const Matrix& phi, double jump) {
  PathGrid p;
  p.times = {0.0, jump, jump + 1e-9, 1.0};
  p.values = {Matrix::Zero(phi.rows(), phi.cols()),
              Matrix::Zero(phi.rows(), phi.cols()), phi, phi};
  return p;
}

// exhaustive oracle over single-interior-knot piecewise-linear time changes:
// lambda maps [0,T]->[0,T] with lambda(a)=b for candidate knots (a,b) on a
// dense grid; value = max(sup |lambda(t)-t|, sup ||p(lambda(t)) - q(t)||)
double two_knot_oracle(const PathGrid& p, const PathGrid& q) {
  const double T = q.times.back();
  auto eval = [](const PathGrid& g, double t) -> const Matrix& {
    for (std::size_t i = 0; i < g.times.size(); ++i)
      if (g.times[i] >= t - 1e-15) return g.values[i];
    return g.values.back();
  };
  double best = std::numeric_limits<double>::infinity();
  const int grid = 40;
  for (int ia = 1; ia < grid; ++ia) {
    double a = T * ia / grid;
    for (int ib = 1; ib < grid; ++ib) {
      double b = T * ib / grid;
      double value = std::abs(a - b);
      for (int it = 0; it <= 400; ++it) {
        double t = T * it / 400.0;
        double lam = t <= b ? t * a / b : a + (t - b) * (T - a) / (T - b);
        value = std::max(value, std::abs(lam - t));
        value = std::max(value, (eval(p, lam) - eval(q, t)).norm());
        if (value >= best) break;
      }
      best = std::min(best, value);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("history view exposes exactly the prefix up to the cutoff") {
  NoisePanel panel = small_panel();
  HistoryView h(&panel, 1, 0.5);
  CHECK(h.visible_steps() == 2);
  Vector manual = panel.increment_vector(1, 0) + panel.increment_vector(1, 1);
  CHECK((h.cumulative() - manual).norm() == 0.0);
  CHECK(h.truncated(0.25).visible_steps() == 1);
  CHECK(h.truncated(0.9).visible_steps() == 2);  // cannot see past own cutoff
  HistoryView h0(&panel, 1, 0.0);
  CHECK(h0.visible_steps() == 0);
  CHECK(h0.cumulative().norm() == 0.0);
}

TEST_CASE("rule factories produce the declared operator values") {
  Matrix phi(2, 2);
  phi << 1, 2, 3, 4;
  NoisePanel panel = small_panel();
  HistoryView h(&panel, 0, 0.5);

  IntegrandRule c = constant_rule(phi);
  CHECK((c.eval(0.3, h) - phi).norm() == 0.0);

  IntegrandRule p = poly_rule(phi, {1.0, -2.0, 0.5});  // 1 - 2t + 0.5 t^2
  double t = 0.4;
  double f = 1.0 - 2.0 * t + 0.5 * t * t;
  CHECK((p.eval(t, h) - f * phi).norm() < 1e-15);

  IntegrandRule e = exp_decay_rule(phi, 2.0);
  CHECK((e.eval(t, h) - std::exp(-2.0 * t) * phi).norm() < 1e-15);

  IntegrandRule n = noise_adapted_clamp_rule(phi, 0.1);
  double clamp = std::min(0.1, h.cumulative().norm());
  CHECK((n.eval(t, h) - clamp * phi).norm() < 1e-15);
  // purity: re-evaluation with the same history gives the same operator
  CHECK((n.eval(t, h) - n.eval(t, HistoryView(&panel, 0, 0.5))).norm() == 0.0);
}

TEST_CASE("discretize freezes rules at the left endpoint") {
  Matrix phi(1, 2);
  phi << 1, 1;
  IntegrandRule lin = poly_rule(phi, {0.0, 1.0});  // t * phi
  SimpleProcess sp = discretize(lin, {0.0, 0.25, 0.5, 1.0});
  REQUIRE(sp.rules.size() == 3);
  NoisePanel panel = small_panel();
  HistoryView h(&panel, 0, 1.0);
  // rule j evaluates at t_j no matter what time is passed in
  CHECK((sp.rules[1].eval(0.49, h) - 0.25 * phi).norm() < 1e-15);
  CHECK((sp.rules[2].eval(0.99, h) - 0.5 * phi).norm() < 1e-15);
  CHECK((sp.rules[0].eval(0.1, h)).norm() == 0.0);

  CHECK_THROWS_AS(discretize(lin, {0.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(discretize(lin, {0.0, 0.5, 0.5}), std::invalid_argument);

  // adaptedness of history-dependent rules: the frozen rule at t_j sees only
  // the panel prefix up to t_j even when evaluated with full history
  IntegrandRule clamp = noise_adapted_clamp_rule(phi, 10.0);
  SimpleProcess spc = discretize(clamp, {0.0, 0.5, 1.0});
  Matrix from_full = spc.rules[1].eval(1.0, HistoryView(&panel, 0, 1.0));
  Matrix from_prefix = clamp.eval(0.5, HistoryView(&panel, 0, 0.5));
  CHECK((from_full - from_prefix).norm() == 0.0);
}

TEST_CASE("sample_path evaluates rules pointwise and deterministically") {
  Matrix phi(1, 2);
  phi << 2, 0;
  IntegrandRule lin = poly_rule(phi, {0.0, 1.0});
  NoisePanel panel = small_panel();
  HistoryView h(&panel, 0, 1.0);
  std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  PathGrid a = sample_path(lin, grid, h);
  PathGrid b = sample_path(lin, grid, h);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK((a.values[i] - grid[i] * phi).norm() < 1e-15);
    CHECK((a.values[i] - b.values[i]).norm() == 0.0);
  }
  // simple-process path: left-endpoint values held on (t_j, t_{j+1}]
  SimpleProcess sp = discretize(lin, {0.0, 0.5, 1.0});
  PathGrid c = sample_path(sp, grid, h);
  CHECK((c.values[1] - 0.0 * phi).norm() < 1e-15);  // t=0.25 in (0, 0.5]
  CHECK((c.values[3] - 0.5 * phi).norm() < 1e-15);  // t=0.75 in (0.5, 1]
}

TEST_CASE("skorokhod bound: trivial and constant-path cases") {
  Matrix phi(2, 2), psi(2, 2);
  phi << 1, 0, 0, 1;
  psi << 0.5, 0, 0, 0.5;
  PathGrid p{{0.0, 0.5, 1.0}, {phi, phi, phi}};
  PathGrid q{{0.0, 0.5, 1.0}, {psi, psi, psi}};
  CHECK(skorokhod_distance_ub(p, p, 4) == 0.0);
  CHECK(skorokhod_distance_ub(p, q, 4) ==
        doctest::Approx(hs_norm(phi - psi)));
  PathGrid bad{{0.0, 0.7}, {phi, phi}};
  CHECK_THROWS_AS(skorokhod_distance_ub(p, bad, 4), std::invalid_argument);
  PathGrid wrong_shape{{0.0, 0.5, 1.0},
                       {Matrix::Zero(1, 2), Matrix::Zero(1, 2),
                        Matrix::Zero(1, 2)}};
  CHECK_THROWS_AS(skorokhod_distance_ub(p, wrong_shape, 4),
                  std::invalid_argument);
}

TEST_CASE("skorokhod bound aligns shifted jumps, verified by a grid oracle") {
  Matrix phi = unit_op();
  PathGrid p = step_path(phi, 0.5);
  PathGrid q = step_path(phi, 0.55);
  double ub = skorokhod_distance_ub(p, q, 8);
  CHECK(ub >= 0.0);
  CHECK(ub <= 0.05 + 1e-6);  // align the jumps, pay the time distortion
  double oracle = two_knot_oracle(p, q);
  CHECK(ub <= oracle + 1e-9);  // at least as good as the 2-knot search
  // never worse than the identity-time-change sup distance (here 1.0)
  double identity_sup = 1.0;
  CHECK(ub <= identity_sup);
}

TEST_CASE("discretization error decays for Lipschitz rules") {
  Matrix phi(1, 2);
  phi << 1, 0;
  IntegrandRule lin = poly_rule(phi, {0.0, 1.0});  // Lipschitz constant 1
  NoisePanel panel = small_panel();
  HistoryView h(&panel, 0, 1.0);
  std::vector<double> fine;
  for (int i = 0; i <= 64; ++i) fine.push_back(i / 64.0);
  PathGrid original = sample_path(lin, fine, h);
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {4, 8, 16, 32}) {
    std::vector<double> part;
    for (int i = 0; i <= n; ++i) part.push_back(static_cast<double>(i) / n);
    SimpleProcess sp = discretize(lin, part);
    PathGrid approx = sample_path(sp, fine, h);
    double d = skorokhod_distance_ub(original, approx, 4);
    // left-endpoint freeze of t*phi on mesh h: sup error = ||phi|| * h
    CHECK(d <= hs_norm(phi) / n + 1e-12);
    CHECK(d <= prev + 1e-12);
    prev = d;
  }
}
