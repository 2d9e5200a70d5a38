#pragma once

#include <Eigen/Dense>
#include <vector>

namespace cylint {

// Elements of the truncated Hilbert spaces are coefficient vectors over the
// coordinate basis; Hilbert-Schmidt operators U -> V are dense d_V x d_U
// grids with entry(i,k) = <phi e_k, f_i>.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

double hs_norm(const Matrix& phi);
Matrix adjoint(const Matrix& phi);

// sum_{k>n} ||phi e_k||^2 over the remaining input-basis columns
double tail_energy(const Matrix& phi, Eigen::Index n);

struct CompactnessReport {
  double bound = 0.0;                // sup of hs_norm over the family
  std::vector<double> tail_curve;    // sup of tail_energy at each schedule point
};

CompactnessReport compactness_probe(const std::vector<Matrix>& family,
                                    const std::vector<int>& n_schedule);

// Nonnegative symmetric trace-class operator on the truncated V.
class SOperator {
 public:
  explicit SOperator(Matrix entries);
  static SOperator zero(Eigen::Index d);
  static SOperator identity(Eigen::Index d);
  static SOperator diagonal(const Vector& diag);

  const Matrix& entries() const { return entries_; }
  double trace() const { return trace_; }
  Eigen::Index dim() const { return entries_.rows(); }

 private:
  Matrix entries_;
  double trace_ = 0.0;
};

// sum_{k>n} <T f_k, f_k>
double s_operator_tail(const SOperator& t, Eigen::Index n);

// operator 2-norm (largest singular value)
double operator_norm(const Matrix& phi);

}  // namespace cylint
