#include "cylint/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <stdexcept>

namespace cylint {

double hs_norm(const Matrix& phi) { return phi.norm(); }

Matrix adjoint(const Matrix& phi) { return phi.transpose(); }

double tail_energy(const Matrix& phi, Eigen::Index n) {
  if (n < 0 || n > phi.cols())
    throw std::out_of_range("tail_energy: N out of range");
  double s = 0.0;
  for (Eigen::Index k = n; k < phi.cols(); ++k) s += phi.col(k).squaredNorm();
  return s;
}

CompactnessReport compactness_probe(const std::vector<Matrix>& family,
                                    const std::vector<int>& n_schedule) {
  if (family.empty())
    throw std::invalid_argument("compactness_probe: empty family");
  CompactnessReport rep;
  for (const Matrix& phi : family) rep.bound = std::max(rep.bound, hs_norm(phi));
  rep.tail_curve.reserve(n_schedule.size());
  for (int n : n_schedule) {
    double sup = 0.0;
    for (const Matrix& phi : family) sup = std::max(sup, tail_energy(phi, n));
    rep.tail_curve.push_back(sup);
  }
  return rep;
}

SOperator::SOperator(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols())
    throw std::invalid_argument("SOperator: entries must be square");
  if (!entries_.isApprox(entries_.transpose(), 1e-12))
    throw std::invalid_argument("SOperator: entries must be symmetric");
  trace_ = entries_.trace();
  Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
  double min_ev = es.eigenvalues().minCoeff();
  if (min_ev < -1e-10 * std::max(trace_, 1e-300))
    throw std::invalid_argument("SOperator: not nonnegative definite");
}

SOperator SOperator::zero(Eigen::Index d) {
  return SOperator(Matrix::Zero(d, d));
}

SOperator SOperator::identity(Eigen::Index d) {
  return SOperator(Matrix::Identity(d, d));
}

SOperator SOperator::diagonal(const Vector& diag) {
  return SOperator(Matrix(diag.asDiagonal()));
}

double s_operator_tail(const SOperator& t, Eigen::Index n) {
  if (n < 0 || n > t.dim())
    throw std::out_of_range("s_operator_tail: N out of range");
  double s = 0.0;
  for (Eigen::Index k = n; k < t.dim(); ++k) s += t.entries()(k, k);
  return s;
}

double operator_norm(const Matrix& phi) {
  if (phi.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(phi);
  return svd.singularValues()(0);
}

}  // namespace cylint
