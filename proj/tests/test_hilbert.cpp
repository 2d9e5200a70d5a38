#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cylint/hilbert.hpp"
#include "cylint/rng.hpp"

using namespace cylint;

namespace {

Matrix random_matrix(std::uint64_t seed, Eigen::Index r, Eigen::Index c) {
  Rng rng(seed);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = rng.gaussian();
  return m;
}

}  // namespace

TEST_CASE("hs_norm on the pinned cases") {
  CHECK(hs_norm(Matrix::Zero(3, 5)) == 0.0);
  CHECK(hs_norm(Matrix::Identity(4, 4)) == doctest::Approx(2.0));
  Matrix m(1, 2);
  m << 3.0, 4.0;
  CHECK(hs_norm(m) == doctest::Approx(5.0));
}

TEST_CASE("adjoint transposes and preserves the norm") {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  Matrix a = adjoint(m);
  CHECK(a(0, 1) == 3.0);
  CHECK(a(1, 0) == 2.0);
  CHECK((adjoint(a) - m).norm() == 0.0);
  Matrix sym(2, 2);
  sym << 1, 2, 2, 5;
  CHECK((adjoint(sym) - sym).norm() == 0.0);
  Matrix r = random_matrix(1, 4, 7);
  CHECK(hs_norm(adjoint(r)) == doctest::Approx(hs_norm(r)));
}

TEST_CASE("hs_norm triangle inequality on random operators") {
  for (int i = 0; i < 20; ++i) {
    Matrix a = random_matrix(100 + i, 3, 5);
    Matrix b = random_matrix(200 + i, 3, 5);
    double sa = 1.5, sb = -0.7;
    CHECK(hs_norm(sa * a + sb * b) <=
          std::abs(sa) * hs_norm(a) + std::abs(sb) * hs_norm(b) + 1e-12);
  }
}

TEST_CASE("tail_energy decomposition and pinned values") {
  CHECK(tail_energy(Matrix::Identity(4, 4), 2) == doctest::Approx(2.0));
  Matrix r = random_matrix(7, 3, 6);
  CHECK(tail_energy(r, 6) == 0.0);
  CHECK(tail_energy(r, 0) == doctest::Approx(hs_norm(r) * hs_norm(r)));
  // rank-one f1 (x) e1 has all energy in the first column
  Matrix rank1 = Matrix::Zero(3, 4);
  rank1(0, 0) = 1.0;
  CHECK(tail_energy(rank1, 1) == 0.0);
  for (Eigen::Index n = 0; n <= 6; ++n) {
    double head = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) head += r.col(k).squaredNorm();
    CHECK(tail_energy(r, n) + head ==
          doctest::Approx(hs_norm(r) * hs_norm(r)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(tail_energy(r, -1), std::out_of_range);
  CHECK_THROWS_AS(tail_energy(r, 7), std::out_of_range);
}

TEST_CASE("compactness_probe separates decaying and non-decaying families") {
  CHECK_THROWS_AS(compactness_probe({}, {0, 1}), std::invalid_argument);

  std::vector<Matrix> zeros{Matrix::Zero(3, 4)};
  auto rep0 = compactness_probe(zeros, {0, 1, 2});
  CHECK(rep0.bound == 0.0);
  for (double t : rep0.tail_curve) CHECK(t == 0.0);

  // shared support in the first column: tail vanishes from N = 1
  std::vector<Matrix> shared;
  for (double c : {0.25, 0.5, 1.0}) {
    Matrix m = Matrix::Zero(3, 4);
    m(0, 0) = c;
    shared.push_back(m);
  }
  auto rep1 = compactness_probe(shared, {0, 1, 2});
  CHECK(rep1.bound == doctest::Approx(1.0));
  CHECK(rep1.tail_curve[0] == doctest::Approx(1.0));
  CHECK(rep1.tail_curve[1] == 0.0);

  // basis-sweeping family: no uniform decay (sup stays 1 for N < d_U)
  std::vector<Matrix> sweep;
  for (int k = 0; k < 4; ++k) {
    Matrix m = Matrix::Zero(3, 4);
    m(0, k) = 1.0;
    sweep.push_back(m);
  }
  auto rep2 = compactness_probe(sweep, {0, 1, 2, 3, 4});
  for (int n = 0; n < 4; ++n) CHECK(rep2.tail_curve[n] == doctest::Approx(1.0));
  CHECK(rep2.tail_curve[4] == 0.0);
  for (std::size_t j = 1; j < rep2.tail_curve.size(); ++j)
    CHECK(rep2.tail_curve[j] <= rep2.tail_curve[j - 1]);
}

TEST_CASE("SOperator validates symmetry and nonnegativity") {
  CHECK_THROWS_AS(SOperator(Matrix::Zero(2, 3)), std::invalid_argument);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.2, 1;
  CHECK_THROWS_AS(SOperator{asym}, std::invalid_argument);
  Matrix neg(2, 2);
  neg << 1, 0, 0, -0.5;
  CHECK_THROWS_AS(SOperator{neg}, std::invalid_argument);

  SOperator id = SOperator::identity(3);
  CHECK(id.trace() == doctest::Approx(3.0));
  SOperator z = SOperator::zero(3);
  CHECK(z.trace() == 0.0);
  Vector d(4);
  d << 1.0, 0.5, 0.25, 0.125;
  SOperator diag = SOperator::diagonal(d);
  CHECK(diag.trace() == doctest::Approx(1.875));
  CHECK(s_operator_tail(diag, 2) == doctest::Approx(0.375));
  CHECK(s_operator_tail(diag, 4) == 0.0);
  CHECK(s_operator_tail(diag, 0) == doctest::Approx(diag.trace()));
  CHECK(s_operator_tail(z, 1) == 0.0);
  CHECK_THROWS_AS(s_operator_tail(diag, 5), std::out_of_range);
}

TEST_CASE("operator_norm and the contraction ideal property") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  CHECK(operator_norm(d) == doctest::Approx(3.0));
  double c = std::cos(0.3), s = std::sin(0.3);
  Matrix rot(2, 2);
  rot << c, -s, s, c;
  CHECK(operator_norm(rot) == doctest::Approx(1.0));

  // ||theta o phi||_HS <= ||phi||_HS for contractions theta
  for (int i = 0; i < 10; ++i) {
    Matrix phi = random_matrix(300 + i, 2, 5);
    Matrix theta = random_matrix(400 + i, 2, 2);
    double n = operator_norm(theta);
    if (n > 0) theta /= n;  // normalize to operator norm 1
    CHECK(hs_norm(theta * phi) <= hs_norm(phi) + 1e-12);
  }
}
