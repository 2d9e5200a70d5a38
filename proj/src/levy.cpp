#include "cylint/levy.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cylint/parallel.hpp"

namespace cylint {

namespace {

// unit-scale characteristic exponents of the coordinate laws
std::complex<double> coord_exponent(const DiagonalJumps& d, double x) {
  switch (d.law) {
    case CoordLaw::Brownian:
      return {-0.5 * x * x, 0.0};
    case CoordLaw::CompoundPoisson: {
      double jump_cf = d.jump_dist == JumpDist::Rademacher
                           ? std::cos(x)
                           : std::exp(-0.5 * x * x);
      return {d.rate * (jump_cf - 1.0), 0.0};
    }
    case CoordLaw::SymmetricStable:
      return {-std::pow(std::abs(x), d.alpha), 0.0};
  }
  return {};
}

// one unit-scale coordinate jump increment over dt
double sample_coord_jump(const DiagonalJumps& d, double dt, Rng& rng) {
  switch (d.law) {
    case CoordLaw::Brownian:
      return std::sqrt(dt) * rng.gaussian();
    case CoordLaw::CompoundPoisson: {
      std::uint64_t n = rng.poisson(d.rate * dt);
      double s = 0.0;
      for (std::uint64_t i = 0; i < n; ++i) {
        if (d.jump_dist == JumpDist::Rademacher)
          s += rng.next_u64() & 1u ? 1.0 : -1.0;
        else
          s += rng.gaussian();
      }
      return s;
    }
    case CoordLaw::SymmetricStable:
      return std::pow(dt, 1.0 / d.alpha) * rng.symmetric_stable(d.alpha);
  }
  return 0.0;
}

Matrix psd_sqrt(const SOperator& q) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(q.entries());
  Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

}  // namespace

void LevyModel::validate() const {
  if (drift.size() < 1)
    throw std::invalid_argument("LevyModel: dimension must be >= 1");
  if (!drift.allFinite())
    throw std::invalid_argument("LevyModel: drift must be finite");
  if (gaussian_cov && gaussian_cov->dim() != drift.size())
    throw std::invalid_argument("LevyModel: gaussian_cov dimension mismatch");
  if (const auto* d = std::get_if<DiagonalJumps>(&jumps)) {
    if (static_cast<Eigen::Index>(d->scales.size()) != drift.size())
      throw std::invalid_argument("LevyModel: scales length mismatch");
    for (double s : d->scales)
      if (!(s > 0.0))
        throw std::invalid_argument("LevyModel: scales must be positive");
    if (d->law == CoordLaw::CompoundPoisson && !(d->rate > 0.0))
      throw std::invalid_argument("LevyModel: rate must be positive");
    if (d->law == CoordLaw::SymmetricStable &&
        !(d->alpha > 0.0 && d->alpha < 2.0))
      throw std::invalid_argument("LevyModel: alpha must be in (0,2)");
  }
  if (const auto* s = std::get_if<StableJumps>(&jumps)) {
    if (!(s->alpha > 0.0 && s->alpha < 2.0))
      throw std::invalid_argument("LevyModel: alpha must be in (0,2)");
    if (!(s->scale > 0.0))
      throw std::invalid_argument("LevyModel: scale must be positive");
  }
}

std::complex<double> LevyModel::symbol(const Vector& u) const {
  if (u.size() != dim())
    throw std::invalid_argument("symbol: dimension mismatch");
  std::complex<double> s(0.0, drift.dot(u));
  if (gaussian_cov) s -= 0.5 * u.dot(gaussian_cov->entries() * u);
  if (const auto* d = std::get_if<DiagonalJumps>(&jumps)) {
    for (Eigen::Index k = 0; k < u.size(); ++k)
      s += coord_exponent(*d, d->scales[k] * u[k]);
  } else if (const auto* st = std::get_if<StableJumps>(&jumps)) {
    s -= st->scale * std::pow(u.norm(), st->alpha);
  }
  return s;
}

LevyModel LevyModel::gaussian(Eigen::Index d, double variance) {
  LevyModel m;
  m.drift = Vector::Zero(d);
  m.gaussian_cov = SOperator::diagonal(Vector::Constant(d, variance));
  m.validate();
  return m;
}

LevyModel LevyModel::diagonal(DiagonalJumps jumps) {
  LevyModel m;
  m.drift = Vector::Zero(static_cast<Eigen::Index>(jumps.scales.size()));
  m.jumps = std::move(jumps);
  m.validate();
  return m;
}

LevyModel LevyModel::canonical_stable(Eigen::Index d, double alpha,
                                      double scale) {
  LevyModel m;
  m.drift = Vector::Zero(d);
  m.jumps = StableJumps{alpha, scale};
  m.validate();
  return m;
}

std::complex<double> increment_cf(const LevyModel& model, const Matrix& phi,
                                  double dt, const Vector& v) {
  if (phi.cols() != model.dim() || phi.rows() != v.size())
    throw std::invalid_argument("increment_cf: dimension mismatch");
  if (!(dt > 0.0)) throw std::invalid_argument("increment_cf: dt must be > 0");
  return std::exp(dt * model.symbol(phi.transpose() * v));
}

Vector NoisePanel::increment_vector(int r, int j) const {
  const double* p = data.data() +
                    (static_cast<std::size_t>(r) * steps() + j) * dim;
  return Eigen::Map<const Vector>(p, dim);
}

int NoisePanel::time_index(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - t) <= 1e-12) return static_cast<int>(i);
  return -1;
}

Vector NoisePanel::aggregate(int r, double t0, double t1) const {
  Vector acc = Vector::Zero(dim);
  for (int j = 0; j < steps(); ++j) {
    if (times[j] >= t0 - 1e-12 && times[j + 1] <= t1 + 1e-12)
      acc += increment_vector(r, j);
  }
  return acc;
}

NoisePanel generate_noise_panel(const LevyModel& model,
                                const std::vector<double>& partition,
                                int replicas, std::uint64_t master_seed,
                                int threads) {
  model.validate();
  if (!model.coordinate_representable())
    throw std::invalid_argument(
        "generate_noise_panel: canonical stable model has no coordinate "
        "representation; use radonify_increment");
  if (replicas < 1)
    throw std::invalid_argument("generate_noise_panel: replicas must be >= 1");
  if (partition.size() < 2 || partition.front() != 0.0)
    throw std::invalid_argument("generate_noise_panel: invalid partition");
  for (std::size_t i = 1; i < partition.size(); ++i)
    if (!(partition[i] > partition[i - 1]))
      throw std::invalid_argument(
          "generate_noise_panel: partition must be strictly increasing");

  const Eigen::Index d = model.dim();
  const int steps = static_cast<int>(partition.size()) - 1;
  NoisePanel panel;
  panel.times = partition;
  panel.replicas = replicas;
  panel.dim = d;
  panel.master_seed = master_seed;
  panel.data.assign(static_cast<std::size_t>(replicas) * steps * d, 0.0);

  Matrix chol;
  if (model.gaussian_cov) chol = psd_sqrt(*model.gaussian_cov);
  const auto* diag = std::get_if<DiagonalJumps>(&model.jumps);

  parallel_for(replicas, threads, [&](int r) {
    for (int j = 0; j < steps; ++j) {
      double dt = partition[j + 1] - partition[j];
      Vector g = Vector::Zero(d);
      Vector jump = Vector::Zero(d);
      for (Eigen::Index k = 0; k < d; ++k) {
        Rng cell(derive_seed(master_seed, static_cast<std::uint64_t>(r),
                             static_cast<std::uint64_t>(j),
                             static_cast<std::uint64_t>(k)));
        if (model.gaussian_cov) g[k] = cell.gaussian();
        if (diag) jump[k] = diag->scales[k] * sample_coord_jump(*diag, dt, cell);
      }
      Vector inc = model.drift * dt + jump;
      if (model.gaussian_cov) inc += std::sqrt(dt) * (chol * g);
      double* out = panel.data.data() +
                    (static_cast<std::size_t>(r) * steps + j) * d;
      Eigen::Map<Vector>(out, d) = inc;
    }
  });
  return panel;
}

namespace {

Vector sample_coordinate_increment(const LevyModel& model, double dt, Rng& rng,
                                   const Matrix* chol) {
  const Eigen::Index d = model.dim();
  const auto* diag = std::get_if<DiagonalJumps>(&model.jumps);
  Vector g = Vector::Zero(d);
  Vector jump = Vector::Zero(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (model.gaussian_cov) g[k] = rng.gaussian();
    if (diag) jump[k] = diag->scales[k] * sample_coord_jump(*diag, dt, rng);
  }
  Vector inc = model.drift * dt + jump;
  if (model.gaussian_cov) {
    if (chol)
      inc += std::sqrt(dt) * (*chol * g);
    else
      inc += std::sqrt(dt) * (psd_sqrt(*model.gaussian_cov) * g);
  }
  return inc;
}

}  // namespace

Vector radonify_increment(const LevyModel& model, const Matrix& phi, double dt,
                          Rng& rng) {
  if (phi.cols() != model.dim())
    throw std::invalid_argument("radonify_increment: shape mismatch");
  if (!(dt > 0.0))
    throw std::invalid_argument("radonify_increment: dt must be > 0");
  if (model.coordinate_representable())
    return phi * sample_coordinate_increment(model, dt, rng, nullptr);

  // canonical stable: subordinated Gaussian so that the characteristic
  // function equals exp(-c dt ||phi* v||^alpha) exactly
  const auto& st = std::get<StableJumps>(model.jumps);
  const Eigen::Index d = model.dim();
  Vector out = phi * (model.drift * dt);
  if (model.gaussian_cov) {
    Matrix chol = psd_sqrt(*model.gaussian_cov);
    Vector g(d);
    for (Eigen::Index k = 0; k < d; ++k) g[k] = rng.gaussian();
    out += std::sqrt(dt) * (phi * (chol * g));
  }
  double a = rng.positive_stable(st.alpha / 2.0);
  double scale = std::pow(st.scale * dt, 1.0 / st.alpha) * std::sqrt(2.0 * a);
  Vector g(d);
  for (Eigen::Index k = 0; k < d; ++k) g[k] = rng.gaussian();
  out += scale * (phi * g);
  return out;
}

double sample_scalar_increment(const LevyModel& model, const Vector& u,
                               double dt, Rng& rng) {
  if (u.size() != model.dim())
    throw std::invalid_argument("sample_scalar_increment: shape mismatch");
  if (model.coordinate_representable())
    return u.dot(sample_coordinate_increment(model, dt, rng, nullptr));
  const auto& st = std::get<StableJumps>(model.jumps);
  double z = model.drift.dot(u) * dt;
  if (model.gaussian_cov) {
    double var = dt * u.dot(model.gaussian_cov->entries() * u);
    z += std::sqrt(var) * rng.gaussian();
  }
  z += std::pow(st.scale * dt, 1.0 / st.alpha) * u.norm() *
       rng.symmetric_stable(st.alpha);
  return z;
}

namespace {

double adaptive_simpson(double (*f)(double), double a, double b, double fa,
                        double fb, double fm, double eps, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, fm, flm, eps / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, fb, frm, eps / 2.0, depth - 1);
}

double clamped_square_density(double x) {
  return std::min(1.0, x * x) *
         std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double gauss_dom_constant() {
  static const double c = [] {
    double a = -10.0, b = 10.0;
    double integral = adaptive_simpson(
        clamped_square_density, a, b, clamped_square_density(a),
        clamped_square_density(b), clamped_square_density(0.5 * (a + b)),
        1e-13, 40);
    return 1.0 / integral;
  }();
  return c;
}

GaussDomReport gauss_dom_check(const LevyModel& model, const Matrix& phi,
                               double dt, int n, std::uint64_t master_seed) {
  if (n < 10000)
    throw std::invalid_argument("gauss_dom_check: N must be >= 1e4");
  GaussDomReport rep;
  rep.c = gauss_dom_constant();
  const Eigen::Index d_v = phi.rows();

  double sa = 0.0, saa = 0.0, sb = 0.0, sbb = 0.0;
  for (int i = 0; i < n; ++i) {
    Rng lr(derive_seed(master_seed, 1, static_cast<std::uint64_t>(i)));
    Vector x = radonify_increment(model, phi, dt, lr);
    double a = std::min(1.0, x.squaredNorm());
    sa += a;
    saa += a * a;

    Rng rr(derive_seed(master_seed, 2, static_cast<std::uint64_t>(i)));
    Vector g(d_v);
    for (Eigen::Index k = 0; k < d_v; ++k) g[k] = rr.gaussian();
    Vector u = phi.transpose() * g;
    double z = sample_scalar_increment(model, u, dt, rr);
    double b = std::min(1.0, z * z);
    sb += b;
    sbb += b * b;
  }
  double ma = sa / n, mb = sb / n;
  rep.lhs = ma;
  rep.rhs = rep.c * mb;
  rep.lhs_se = std::sqrt(std::max(0.0, saa / n - ma * ma) / n);
  rep.rhs_se = rep.c * std::sqrt(std::max(0.0, sbb / n - mb * mb) / n);
  return rep;
}

}  // namespace cylint
