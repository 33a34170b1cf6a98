#include "parted/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>

#include "parted/simd/kernels.hpp"

namespace parted {

namespace {

void require_reg(double reg) {
  if (!(reg > 0.0) || !std::isfinite(reg)) {
    throw std::invalid_argument("regulariser must be a positive finite number, got " + std::to_string(reg));
  }
}

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string("non-finite value in ") + what);
  }
}

// reg * I + V^T V, lower triangle accumulated one sample at a time, then mirrored.
Matrix regularised_gram(const Matrix& samples, double reg) {
  const std::size_t n = samples.cols();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = reg;
  for (std::size_t k = 0; k < samples.rows(); ++k) {
    auto v = samples.row(k);
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] == 0.0) continue;
      simd::axpy(v[i], v.subspan(0, i + 1), a.row(i).subspan(0, i + 1));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) a(j, i) = a(i, j);
  }
  return a;
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) { return simd::dot(a, b); }

double norm(std::span<const double> x) { return std::sqrt(simd::sum_squares(x)); }

Matrix gram_matrix(const Matrix& samples) {
  const std::size_t n = samples.rows();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      k(i, j) = simd::dot(samples.row(i), samples.row(j));
      k(j, i) = k(i, j);
    }
  }
  return k;
}

double min_eigenvalue(const Matrix& symmetric) {
  const auto n = static_cast<Eigen::Index>(symmetric.rows());
  if (n == 0) return 0.0;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> view(
      symmetric.flat().data(), n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(view, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolve failed");
  return solver.eigenvalues()(0);
}

Cholesky::Cholesky(const Matrix& spd) : factor_(spd.rows(), spd.rows()) {
  if (spd.rows() != spd.cols()) throw std::invalid_argument("Cholesky: matrix is not square");
  const std::size_t n = spd.rows();
  for (std::size_t i = 0; i < n; ++i) {
    auto li = factor_.row(i);
    for (std::size_t j = 0; j < i; ++j) {
      const double s = spd(i, j) - simd::dot(li.subspan(0, j), factor_.row(j).subspan(0, j));
      li[j] = s / factor_(j, j);
    }
    const double pivot = spd(i, i) - simd::sum_squares(li.subspan(0, i));
    if (!(pivot > 0.0)) {
      throw NumericalError("Cholesky: matrix not positive definite at pivot " + std::to_string(i));
    }
    li[i] = std::sqrt(pivot);
  }
}

void Cholesky::solve_lower(std::span<double> b) const {
  assert(b.size() == dim());
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = (b[i] - simd::dot(factor_.row(i).subspan(0, i), b.subspan(0, i))) / factor_(i, i);
  }
}

void Cholesky::solve_upper(std::span<double> y) const {
  assert(y.size() == dim());
  for (std::size_t i = y.size(); i-- > 0;) {
    y[i] /= factor_(i, i);
    simd::axpy(-y[i], factor_.row(i).subspan(0, i), y.subspan(0, i));
  }
}

Vector Cholesky::solve(std::span<const double> b) const {
  Vector x(b.begin(), b.end());
  solve_lower(x);
  solve_upper(x);
  return x;
}

double Cholesky::log_det() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) acc += std::log(factor_(i, i));
  return 2.0 * acc;
}

RidgeSystem::RidgeSystem(std::size_t dim, double reg) : RidgeSystem(Matrix(0, dim), reg) {}

RidgeSystem::RidgeSystem(const Matrix& samples, double reg)
    : reg_((require_reg(reg), reg)),
      gram_((require_finite(samples.flat(), "ridge samples"), regularised_gram(samples, reg))),
      chol_(gram_),
      moment_(samples.cols(), 0.0) {}

Vector RidgeSystem::solve(std::span<const double> rhs) const { return chol_.solve(rhs); }

double RidgeSystem::bonus(std::span<const double> query) const {
  Vector scratch(dim());
  return bonus(query, scratch);
}

double RidgeSystem::bonus(std::span<const double> query, std::span<double> scratch) const {
  assert(query.size() == dim() && scratch.size() == dim());
  std::copy(query.begin(), query.end(), scratch.begin());
  chol_.solve_lower(scratch);
  return std::sqrt(simd::sum_squares(scratch));
}

double RidgeSystem::log_det_ratio() const { return chol_.log_det() - static_cast<double>(dim()) * std::log(reg_); }

Vector moment(const Matrix& samples, std::span<const double> targets) {
  if (targets.size() != samples.rows()) throw std::invalid_argument("moment: sample/target count mismatch");
  Vector b(samples.cols(), 0.0);
  for (std::size_t k = 0; k < samples.rows(); ++k) {
    if (targets[k] != 0.0) simd::axpy(targets[k], samples.row(k), b);
  }
  return b;
}

RidgeFit ridge_fit(const Matrix& samples, std::span<const double> targets, double reg) {
  require_finite(targets, "ridge targets");
  RidgeSystem system(samples, reg);
  system.moment_ = moment(samples, targets);
  Vector solution = system.solve(system.moment_);
  return RidgeFit{std::move(system), std::move(solution)};
}

KernelRidge::KernelRidge(Matrix gram, double reg)
    : reg_((require_reg(reg), reg)),
      gram_(std::move(gram)),
      chol_([&] {
        Matrix shifted = gram_;
        for (std::size_t i = 0; i < shifted.rows(); ++i) shifted(i, i) += reg_;
        return Cholesky(shifted);
      }()) {}

Vector KernelRidge::weights(std::span<const double> targets) const { return chol_.solve(targets); }

double KernelRidge::bonus(std::span<const double> cross, double self) const {
  Vector y(cross.begin(), cross.end());
  chol_.solve_lower(y);
  const double quad = self - simd::sum_squares(y);
  return std::sqrt(std::max(quad, 0.0) / reg_);
}

double KernelRidge::log_det_ratio() const {
  return chol_.log_det() - static_cast<double>(size()) * std::log(reg_);
}

double gram_log_det_ratio(const Matrix& gram, double reg) {
  require_reg(reg);
  if (gram.rows() == 0) return 0.0;
  const double lo = min_eigenvalue(gram);
  if (lo < -1e-10) throw std::invalid_argument("Gram matrix is not positive semidefinite (eigenvalue " +
                                               std::to_string(lo) + ")");
  return KernelRidge(gram, reg).log_det_ratio();
}

IdentityCheck kernel_bonus_identity_check(const Matrix& vectors, double reg, std::span<const double> query) {
  RidgeSystem primal(vectors, reg);
  const double b = primal.bonus(query);

  const double self = simd::sum_squares(query);
  Vector cross(vectors.rows());
  for (std::size_t i = 0; i < vectors.rows(); ++i) cross[i] = simd::dot(vectors.row(i), query);
  double rhs = self / reg;
  if (vectors.rows() > 0) {
    KernelRidge dual(gram_matrix(vectors), reg);
    Vector alpha = dual.weights(cross);
    rhs = (self - simd::dot(cross, alpha)) / reg;
  }
  return IdentityCheck{b * b, rhs};
}

Vector ridge_solve_dual(const Matrix& samples, std::span<const double> targets, double reg) {
  require_finite(targets, "ridge targets");
  Vector x(samples.cols(), 0.0);
  if (samples.rows() == 0) return x;
  KernelRidge dual(gram_matrix(samples), reg);
  Vector alpha = dual.weights(targets);
  for (std::size_t k = 0; k < samples.rows(); ++k) simd::axpy(alpha[k], samples.row(k), x);
  return x;
}

FeatureBonus::FeatureBonus(Matrix samples, double reg, BonusPath path, std::size_t dual_threshold)
    : samples_(std::move(samples)),
      solver_([&]() -> std::variant<RidgeSystem, KernelRidge> {
        const bool primal = path == BonusPath::primal ||
                            (path == BonusPath::automatic && samples_.cols() <= dual_threshold);
        if (primal) return RidgeSystem(samples_, reg);
        return KernelRidge(gram_matrix(samples_), reg);
      }()) {}

double FeatureBonus::bonus(std::span<const double> query) const {
  if (const auto* primal = std::get_if<RidgeSystem>(&solver_)) return primal->bonus(query);
  const auto& dual = std::get<KernelRidge>(solver_);
  Vector cross(samples_.rows());
  for (std::size_t i = 0; i < samples_.rows(); ++i) cross[i] = simd::dot(samples_.row(i), query);
  const double self = simd::sum_squares(query);
  if (samples_.rows() == 0) return std::sqrt(self / dual.reg());
  return dual.bonus(cross, self);
}

double FeatureBonus::log_det_ratio() const {
  if (const auto* primal = std::get_if<RidgeSystem>(&solver_)) return primal->log_det_ratio();
  return std::get<KernelRidge>(solver_).log_det_ratio();
}

}  // namespace parted
