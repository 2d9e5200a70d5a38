#pragma once

#include <functional>
#include <vector>

#include "cylint/levy.hpp"

namespace cylint {

// Read-only view of the coordinate noise of one replica, restricted to step
// intervals ending at or before the cutoff time. A rule evaluated at time t
// receives exactly this prefix, so adaptedness holds by construction.
class HistoryView {
 public:
  HistoryView() = default;
  HistoryView(const NoisePanel* panel, int replica, double cutoff)
      : panel_(panel), replica_(replica), cutoff_(cutoff) {}

  // number of step increments with end time <= cutoff (lazy; rules that
  // ignore history never pay for the scan)
  int visible_steps() const {
    if (visible_ < 0) {
      int v = 0;
      if (panel_) {
        while (v < panel_->steps() && panel_->times[v + 1] <= cutoff_ + 1e-12)
          ++v;
      }
      visible_ = v;
    }
    return visible_;
  }
  double cutoff() const { return cutoff_; }
  double step_end(int j) const { return panel_->times[j + 1]; }
  Vector increment(int j) const { return panel_->increment_vector(replica_, j); }
  Vector cumulative() const {
    Eigen::Index d = panel_ ? panel_->dim : 0;
    Vector acc = Vector::Zero(d);
    int v = visible_steps();
    for (int j = 0; j < v; ++j) acc += increment(j);
    return acc;
  }
  HistoryView truncated(double s) const {
    return HistoryView(panel_, replica_, std::min(s, cutoff_));
  }

 private:
  const NoisePanel* panel_ = nullptr;
  int replica_ = 0;
  double cutoff_ = 0.0;
  mutable int visible_ = -1;
};

// An adapted, operator-valued integrand as a pure history-dependent rule.
struct IntegrandRule {
  Eigen::Index d_v = 0, d_u = 0;
  std::function<Matrix(double t, const HistoryView&)> eval;
};

IntegrandRule constant_rule(Matrix phi);
IntegrandRule poly_rule(Matrix phi, std::vector<double> coeffs);  // (sum c_i t^i) phi
IntegrandRule exp_decay_rule(Matrix phi, double rate);            // exp(-rate t) phi
// min(cap, ||running noise sum at t||) * phi
IntegrandRule noise_adapted_clamp_rule(Matrix phi, double cap);

// Simple process: one rule per partition interval; rule j produces the value
// held on (t_j, t_{j+1}], measurable at the left endpoint t_j.
struct SimpleProcess {
  std::vector<double> partition;     // N+1 points, 0 = t_1 < ... < t_{N+1} = T
  std::vector<IntegrandRule> rules;  // size N
  Eigen::Index d_v = 0, d_u = 0;
};

// Left-endpoint discretization: interval j holds the rule evaluated at t_j
// with history up to t_j only.
SimpleProcess discretize(const IntegrandRule& rule,
                         std::vector<double> partition);

// Sampled caglad trajectory: values[i] is the path value at times[i]; the
// path is treated as constant on (times[i-1], times[i]].
struct PathGrid {
  std::vector<double> times;
  std::vector<Matrix> values;
};

PathGrid sample_path(const IntegrandRule& rule, const std::vector<double>& grid,
                     const HistoryView& history);

// evaluate a simple process path on a grid (no panel needed for its values)
PathGrid sample_path(const SimpleProcess& sp, const std::vector<double>& grid,
                     const HistoryView& history);

// Upper bound on the Skorokhod distance d_J over piecewise-linear time
// changes with knots on the merged grid; minimax dynamic program over
// monotone segment alignments, restricted to a band of width knot_budget.
// Always <= the identity-time-change value sup_t ||p(t)-q(t)||.
double skorokhod_distance_ub(const PathGrid& p, const PathGrid& q,
                             int knot_budget);

}  // namespace cylint
